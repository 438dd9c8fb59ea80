use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gen::GenConfig;
use crate::lod::{LodConfig, Viewport};
use crate::math::{Aabb, Mat4, Vec3};
use crate::pipeline::build_node_surfels;
use crate::render::{render_path_with, CameraPath, Keyframe, RenderMode};
use crate::sampler::SamplerConfig;
use crate::scene::{Mesh, SceneNode};

/// Lattice proportions `AxBxC` along x, y and z. Axes set to 1 stay a single
/// layer; the others grow with the instance count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec(pub [u32; 3]);

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("grid `{s}` is not of the form AxBxC with positive integers"));
        let parts: Vec<u32> = s.split('x').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        match parts[..] {
            [a, b, c] if a > 0 && b > 0 && c > 0 => Ok(GridSpec([a, b, c])),
            _ => Err(bad()),
        }
    }
}

/// Instances per axis for about `count` instances in the proportions of `grid`.
/// A grid of all ones grows as a cube.
pub fn lattice_dims(grid: GridSpec, count: usize) -> [usize; 3] {
    let mut weights = grid.0.map(|v| v as f64);
    let mut active: Vec<usize> = (0..3).filter(|&i| grid.0[i] > 1).collect();
    if active.is_empty() {
        active = vec![0, 1, 2];
        weights = [1.0; 3];
    }
    let product: f64 = active.iter().map(|&i| weights[i]).product();
    let s = (count.max(1) as f64 / product).powf(1.0 / active.len() as f64);
    let mut dims = [1usize; 3];
    for &i in &active {
        dims[i] = ((weights[i] * s).round() as usize).max(1);
    }
    dims
}

pub fn effective_triangles(instances: u64, prototype_triangles: u64) -> u64 {
    instances * prototype_triangles
}

const TILE: usize = 8;

/// A lattice of `dims` references to `prototype`, centered on the origin, with
/// `spacing` between instance origins. Instances are grouped into tiles of up
/// to 8 per axis so whole tiles can be culled.
pub fn instanced_grid(prototype: &Arc<SceneNode>, dims: [usize; 3], spacing: f64) -> Arc<SceneNode> {
    let offset = |i: usize, n: usize| (i as f64 - (n as f64 - 1.0) * 0.5) * spacing;
    let tiles = dims.map(|n| n.div_ceil(TILE));
    let mut tile_nodes = Vec::with_capacity(tiles.iter().product());
    for tz in 0..tiles[2] {
        for ty in 0..tiles[1] {
            for tx in 0..tiles[0] {
                let mut kids = Vec::new();
                for z in tz * TILE..((tz + 1) * TILE).min(dims[2]) {
                    for y in ty * TILE..((ty + 1) * TILE).min(dims[1]) {
                        for x in tx * TILE..((tx + 1) * TILE).min(dims[0]) {
                            let t = Vec3::new(offset(x, dims[0]), offset(y, dims[1]), offset(z, dims[2]));
                            kids.push(Arc::new(SceneNode::group(
                                format!("inst_{x}_{y}_{z}"),
                                Mat4::translation(t),
                                vec![prototype.clone()],
                            )));
                        }
                    }
                }
                tile_nodes.push(Arc::new(SceneNode::group(format!("tile_{tx}_{ty}_{tz}"), Mat4::IDENTITY, kids)));
            }
        }
    }
    Arc::new(SceneNode::group("grid", Mat4::IDENTITY, tile_nodes))
}

/// A 30-frame pass over a lattice with the given horizontal half-extent,
/// looking ahead and down across the instances.
pub fn default_flyby(half_extent: f64, prototype_bounds: &Aabb, frames: u32) -> CameraPath {
    let h = 0.2 * half_extent + prototype_bounds.max.y.max(0.0);
    let key = |frame: u32, x: f64| Keyframe {
        frame,
        eye: [x, h, -0.9 * half_extent],
        forward: [0.25, -0.45, 1.0],
        up: [0.0, 1.0, 0.0],
    };
    let mut path = CameraPath::new(vec![key(0, -0.5 * half_extent), key(frames.max(2) - 1, 0.5 * half_extent)])
        .expect("the fly-by is a valid path");
    path.far = 1e3 * half_extent.max(1.0);
    path.near = 1e-3 * half_extent.max(1.0);
    path
}

pub struct BenchConfig {
    pub grid: GridSpec,
    pub counts: Vec<usize>,
    pub viewport: Viewport,
    pub lod: LodConfig,
    pub gen: GenConfig,
    pub sampler: SamplerConfig,
    /// Defaults to [`default_flyby`] over the lattice of the first count.
    pub path: Option<CameraPath>,
    pub frames: u32,
    /// Distance between instance origins in multiples of the prototype's largest extent.
    pub spacing: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            grid: GridSpec([1, 1, 1]),
            counts: vec![1],
            viewport: Viewport { width: 512, height: 512 },
            lod: LodConfig::default(),
            gen: GenConfig::default(),
            sampler: SamplerConfig::default(),
            path: None,
            frames: 30,
            spacing: 2.0,
        }
    }
}

pub const BENCH_CSV_HEADER: &str =
    "instances,effective_triangles,mean_points,mean_triangles,mean_frame_ms,median_frame_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub requested: usize,
    pub instances: u64,
    pub effective_triangles: u64,
    pub mean_points: f64,
    pub mean_triangles: f64,
    /// Selection plus rasterization; the first frame is a warm-up and excluded.
    pub mean_frame_ms: f64,
    pub median_frame_ms: f64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.1},{:.1},{:.3},{:.3}",
            self.instances, self.effective_triangles, self.mean_points, self.mean_triangles, self.mean_frame_ms, self.median_frame_ms
        )
    }
}

/// Builds surfels for the template once, then renders the path over instanced
/// lattices of each requested size.
pub fn scaling_bench(template: Arc<Mesh>, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let proto = Arc::new(SceneNode::leaf("prototype", Mat4::IDENTITY, template));
    let arr = build_node_surfels(&proto, &cfg.gen, &cfg.sampler).map_err(|e| e.at_node("prototype"))?;
    proto.attach_surfels(Arc::new(arr));
    scaling_bench_with_prototype(&proto, cfg)
}

/// [`scaling_bench`] for a prototype that already carries its surfels.
pub fn scaling_bench_with_prototype(proto: &Arc<SceneNode>, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.lod.validate()?;
    if cfg.counts.is_empty() {
        return Err(Error::InvalidParameter("no instance counts given".into()));
    }
    if !(cfg.spacing > 0.0 && cfg.spacing.is_finite()) {
        return Err(Error::InvalidParameter("spacing must be positive".into()));
    }
    let bounds = proto.local_bounds();
    if bounds.is_empty() {
        return Err(Error::EmptyBounds);
    }
    let spacing = cfg.spacing * bounds.extent().max_element();
    let path = match &cfg.path {
        Some(p) => p.clone(),
        None => {
            let d = lattice_dims(cfg.grid, cfg.counts[0]);
            let half = 0.5 * spacing * d[0].max(d[2]) as f64;
            default_flyby(half, &bounds, cfg.frames)
        }
    };
    let tris = proto.complexity();
    let mut rows = Vec::new();
    for &count in &cfg.counts {
        let dims = lattice_dims(cfg.grid, count);
        let root = instanced_grid(proto, dims, spacing);
        let instances = dims.iter().product::<usize>() as u64;
        let mut per_frame = Vec::new();
        render_path_with(&root, &path, cfg.viewport, &cfg.lod, RenderMode::Lod, |f| {
            let (_, st) = f.lod.expect("lod frames requested");
            per_frame.push(st);
            Ok(())
        })?;
        let timed: Vec<_> = if per_frame.len() > 1 { per_frame[1..].to_vec() } else { per_frame.clone() };
        let n = timed.len() as f64;
        let mut ms: Vec<f64> = timed.iter().map(|s| s.select_ms + s.raster_ms).collect();
        ms.sort_by(f64::total_cmp);
        let median = if ms.len() % 2 == 1 { ms[ms.len() / 2] } else { 0.5 * (ms[ms.len() / 2 - 1] + ms[ms.len() / 2]) };
        rows.push(BenchRow {
            requested: count,
            instances,
            effective_triangles: effective_triangles(instances, tris),
            mean_points: timed.iter().map(|s| s.points as f64).sum::<f64>() / n,
            mean_triangles: timed.iter().map(|s| s.triangles as f64).sum::<f64>() / n,
            mean_frame_ms: ms.iter().sum::<f64>() / n,
            median_frame_ms: median,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::shapes;

    #[test]
    fn grid_parsing() {
        assert_eq!("100x1x100".parse::<GridSpec>().unwrap(), GridSpec([100, 1, 100]));
        for bad in ["", "3x3", "0x1x1", "ax1x1", "1x1x1x1"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(lattice_dims(GridSpec([1, 1, 1]), 1), [1, 1, 1]);
        assert_eq!(lattice_dims(GridSpec([1, 1, 1]), 8), [2, 2, 2]);
        assert_eq!(lattice_dims(GridSpec([1, 1, 1]), 64), [4, 4, 4]);
        assert_eq!(lattice_dims(GridSpec([100, 1, 100]), 15_129), [123, 1, 123]);
        assert_eq!(lattice_dims(GridSpec([100, 1, 100]), 8 * 15_129), [348, 1, 348]);
        assert_eq!(lattice_dims(GridSpec([4, 1, 1]), 10), [10, 1, 1]);
    }

    #[test]
    fn effective_triangle_arithmetic() {
        assert_eq!(effective_triangles(10_000, 100_000), 1_000_000_000);
    }

    #[test]
    fn grid_shares_the_prototype() {
        let proto = Arc::new(SceneNode::leaf("p", Mat4::IDENTITY, Arc::new(shapes::unit_cube([1, 2, 3, 255]))));
        let g = instanced_grid(&proto, [10, 1, 3], 2.0);
        assert_eq!(g.complexity(), 30 * 12);
        let b = g.local_bounds();
        assert!((b.extent().x - 19.0).abs() < 1e-12 && (b.extent().z - 5.0).abs() < 1e-12);
        assert_eq!(Arc::strong_count(&proto), 31);
    }

    #[test]
    fn single_cube_bench() {
        let cfg = BenchConfig {
            counts: vec![1, 8],
            viewport: Viewport { width: 64, height: 64 },
            gen: GenConfig { resolution: 32 },
            sampler: SamplerConfig { max_surfels: 200, candidate_count: 10, seed: 1 },
            frames: 4,
            ..Default::default()
        };
        let rows = scaling_bench(Arc::new(shapes::unit_cube([200, 200, 200, 255])), &cfg).unwrap();
        assert_eq!(rows[0].instances, 1);
        assert_eq!(rows[0].effective_triangles, 12);
        assert_eq!(rows[1].instances, 8);
        assert_eq!(rows[1].effective_triangles, 96);
        assert!(rows.iter().all(|r| r.mean_frame_ms >= 0.0));
    }
}

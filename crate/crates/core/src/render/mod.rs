//! Deterministic software renderer for reference frames (all geometry) and
//! level-of-detail frames (a [`DrawList`]).
//!
//! Triangles are clipped against the near plane, rasterized with the shared
//! pixel-center rule and interpolated perspective-correctly. Surfels become
//! screen-aligned square splats. Both are depth-tested with a strict
//! less-than and shaded by the same headlight: color × max(0.2, |n · forward|).

mod path;

pub use path::{render_path, render_path_with, CameraPath, FrameRow, Keyframe, PathFrame, RenderMode};

use crate::frame::{Image, BACKGROUND};
use crate::lod::{is_culled, point_size, Camera, DrawList, LodConfig, Viewport};
use crate::math::{Mat4, Vec3};
use crate::raster::scan_triangle;
use crate::scene::{Mesh, SceneNode};
use crate::surfel::Surfel;

/// Minimum headlight term, so surfaces seen edge-on stay visible.
pub const AMBIENT_FLOOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameStats {
    pub triangles: u64,
    pub points: u64,
    pub select_ms: f64,
    pub raster_ms: f64,
}

/// Wall-clock timing; absent on targets without a clock.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    fn ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64() * 1e3;
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}

pub(crate) fn elapsed_ms<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let sw = Stopwatch::start();
    let out = f();
    (out, sw.ms())
}

/// Color and depth targets. Depth is distance along the view direction.
struct Target {
    image: Image,
    depth: Vec<f64>,
    camera: Camera,
    viewport: Viewport,
    focal: f64,
}

#[derive(Clone, Copy)]
struct ClipVertex {
    view: Vec3,
    normal: Vec3,
    color: [f64; 4],
}

impl ClipVertex {
    fn lerp(&self, o: &ClipVertex, t: f64) -> ClipVertex {
        ClipVertex {
            view: self.view.lerp(o.view, t),
            normal: self.normal.lerp(o.normal, t),
            color: std::array::from_fn(|k| self.color[k] + (o.color[k] - self.color[k]) * t),
        }
    }
}

fn shade(color: [f64; 4], normal: Vec3, forward: Vec3) -> [u8; 4] {
    let n = normal.normalized();
    let k = n.dot(forward).abs().max(AMBIENT_FLOOR);
    let c = |v: f64| (v * k).round().clamp(0.0, 255.0) as u8;
    [c(color[0]), c(color[1]), c(color[2]), 255]
}

impl Target {
    fn new(camera: &Camera, viewport: Viewport) -> Self {
        let image = Image::new(viewport.width, viewport.height, BACKGROUND).expect("viewport sizes are positive");
        Target {
            image,
            depth: vec![camera.far; viewport.width as usize * viewport.height as usize],
            camera: *camera,
            viewport,
            focal: camera.focal_px(viewport),
        }
    }

    fn screen(&self, v: Vec3) -> [f64; 2] {
        [
            self.viewport.width as f64 * 0.5 + self.focal * v.x / v.z,
            self.viewport.height as f64 * 0.5 - self.focal * v.y / v.z,
        ]
    }

    fn draw_mesh(&mut self, mesh: &Mesh, transform: &Mat4) {
        let cam = self.camera;
        let nm = transform.normal_matrix();
        let verts: Vec<ClipVertex> = mesh
            .positions()
            .iter()
            .zip(mesh.normals())
            .zip(mesh.colors())
            .map(|((&p, &n), c)| ClipVertex {
                view: cam.to_view(transform.transform_point(p)),
                normal: nm.transform_vector(n),
                color: c.map(f64::from),
            })
            .collect();
        for t in mesh.triangles() {
            let tri = t.map(|i| verts[i as usize]);
            self.draw_triangle(tri);
        }
    }

    fn draw_triangle(&mut self, tri: [ClipVertex; 3]) {
        let near = self.camera.near;
        let inside = tri.iter().filter(|v| v.view.z >= near).count();
        if inside == 0 || tri.iter().all(|v| v.view.z > self.camera.far) {
            return;
        }
        if inside == 3 {
            self.fill(tri);
            return;
        }
        // Sutherland-Hodgman against z = near
        let mut poly: Vec<ClipVertex> = Vec::with_capacity(4);
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            let (ain, bin) = (a.view.z >= near, b.view.z >= near);
            if ain {
                poly.push(a);
            }
            if ain != bin {
                let t = (near - a.view.z) / (b.view.z - a.view.z);
                let mut v = a.lerp(&b, t);
                v.view.z = near;
                poly.push(v);
            }
        }
        for i in 1..poly.len() - 1 {
            self.fill([poly[0], poly[i], poly[i + 1]]);
        }
    }

    fn fill(&mut self, tri: [ClipVertex; 3]) {
        let s = tri.map(|v| self.screen(v.view));
        let inv_z = tri.map(|v| 1.0 / v.view.z);
        let (w, forward) = (self.viewport.width, self.camera.forward);
        let (image, depth) = (&mut self.image, &mut self.depth);
        scan_triangle(w, self.viewport.height, s, |x, y, b| {
            let pw = [b[0] * inv_z[0], b[1] * inv_z[1], b[2] * inv_z[2]];
            let sum = pw[0] + pw[1] + pw[2];
            let z = 1.0 / sum;
            let i = y as usize * w as usize + x as usize;
            if z < depth[i] {
                depth[i] = z;
                let k = pw.map(|v| v / sum);
                let n = tri[0].normal * k[0] + tri[1].normal * k[1] + tri[2].normal * k[2];
                let c = std::array::from_fn(|j| tri[0].color[j] * k[0] + tri[1].color[j] * k[1] + tri[2].color[j] * k[2]);
                image.set(x, y, shade(c, n, forward));
            }
        });
    }

    /// Square splats of `base_size` pixels, scaled per surfel by its eye-space normal.
    fn draw_surfels(&mut self, surfels: &[Surfel], transform: &Mat4, base_size: f64, cfg: &LodConfig) {
        let cam = self.camera;
        let nm = transform.normal_matrix();
        let (w, h) = (self.viewport.width as i64, self.viewport.height as i64);
        for s in surfels {
            let v = cam.to_view(transform.transform_point(s.position()));
            if !(v.z >= cam.near && v.z < cam.far) {
                continue;
            }
            let [sx, sy] = self.screen(v);
            let n = nm.transform_vector(s.normal()).normalized();
            let size = point_size(base_size, n.dot(cam.forward), cfg);
            let k = (size.round() as i64).max(1);
            let x0 = (sx - k as f64 * 0.5).floor() as i64;
            let y0 = (sy - k as f64 * 0.5).floor() as i64;
            let rgb = shade(s.color.map(f64::from), n, cam.forward);
            for y in y0.max(0)..(y0 + k).min(h) {
                for x in x0.max(0)..(x0 + k).min(w) {
                    let i = (y * w + x) as usize;
                    if v.z < self.depth[i] {
                        self.depth[i] = v.z;
                        self.image.set(x as u32, y as u32, rgb);
                    }
                }
            }
        }
    }
}

/// Renders every triangle of the scene, ignoring surfel arrays.
pub fn render_reference(root: &SceneNode, camera: &Camera, viewport: Viewport) -> (Image, FrameStats) {
    let mut stats = FrameStats::default();
    let (image, ms) = elapsed_ms(|| {
        let mut target = Target::new(camera, viewport);
        draw_subtree(&mut target, root, &Mat4::IDENTITY, &mut stats.triangles);
        target.image
    });
    stats.raster_ms = ms;
    (image, stats)
}

fn draw_subtree(target: &mut Target, node: &SceneNode, parent: &Mat4, triangles: &mut u64) {
    let world = *parent * *node.transform();
    if is_culled(&node.local_bounds(), &world, &target.camera, target.viewport) {
        return;
    }
    if let Some(mesh) = node.mesh() {
        target.draw_mesh(mesh, &world);
        *triangles += mesh.triangle_count();
    }
    for c in node.children() {
        draw_subtree(target, c, &world, triangles);
    }
}

/// Renders a draw list: triangle entries as in [`render_reference`], then the
/// surfel prefixes as splats. Weights are not blended.
pub fn render_drawlist(list: &DrawList, camera: &Camera, viewport: Viewport, cfg: &LodConfig) -> (Image, FrameStats) {
    let (image, ms) = elapsed_ms(|| {
        let mut target = Target::new(camera, viewport);
        for t in &list.triangles {
            target.draw_mesh(&t.mesh, &t.transform);
        }
        for p in &list.points {
            target.draw_surfels(p.surfels.prefix(p.prefix_length), &p.transform, p.point_size, cfg);
        }
        target.image
    });
    let stats = FrameStats {
        triangles: list.triangle_count(),
        points: list.point_count(),
        select_ms: 0.0,
        raster_ms: ms,
    };
    (image, stats)
}

//! Per-frame level-of-detail selection.
//!
//! The scene is walked depth-first. A node whose projected bounding box is
//! small enough and which carries surfels is drawn as a prefix of its array
//! sized to the pixels it covers; anything else is refined. Near the
//! threshold both representations are drawn, with the coarse prefix shrinking
//! linearly across the band so the switch does not pop.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::math::{Aabb, Mat4, Vec3};
use crate::scene::{Mesh, SceneNode};
use crate::surfel::SurfelArray;

/// Perspective camera. `fov_y` is the full vertical field of view in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub eye: Vec3,
    pub forward: Vec3,
    pub up: Vec3,
    pub right: Vec3,
    pub fov_y: f64,
    pub near: f64,
    pub far: f64,
}

impl Camera {
    /// Builds an orthonormal frame from `forward` and an `up` hint.
    pub fn new(eye: Vec3, forward: Vec3, up: Vec3, fov_y: f64, near: f64, far: f64) -> Result<Self> {
        let f = forward.normalized();
        let r = f.cross(up).normalized();
        if f == Vec3::ZERO || r == Vec3::ZERO || !eye.is_finite() {
            return Err(Error::InvalidParameter("camera forward and up must be finite and not parallel".into()));
        }
        if !(fov_y > 0.0 && fov_y < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!("field of view {fov_y} rad is outside (0, pi)")));
        }
        if !(near > 0.0 && near < far) {
            return Err(Error::InvalidParameter(format!("need 0 < near < far, got {near} and {far}")));
        }
        Ok(Camera {
            eye,
            forward: f,
            up: r.cross(f),
            right: r,
            fov_y,
            near,
            far,
        })
    }

    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3, fov_y: f64, near: f64, far: f64) -> Result<Self> {
        Camera::new(eye, target - eye, up, fov_y, near, far)
    }

    /// Camera-space coordinates: x right, y up, z along `forward`.
    #[inline]
    pub fn to_view(&self, p: Vec3) -> Vec3 {
        let d = p - self.eye;
        Vec3::new(d.dot(self.right), d.dot(self.up), d.dot(self.forward))
    }

    /// Focal length in pixels for a viewport of the given height.
    #[inline]
    pub fn focal_px(&self, viewport: Viewport) -> f64 {
        viewport.height as f64 * 0.5 / (self.fov_y * 0.5).tan()
    }

    /// Pixel coordinates (x right, y down) of a camera-space point with `z > 0`.
    #[inline]
    pub fn view_to_screen(&self, v: Vec3, viewport: Viewport) -> [f64; 2] {
        let f = self.focal_px(viewport);
        [
            viewport.width as f64 * 0.5 + f * v.x / v.z,
            viewport.height as f64 * 0.5 - f * v.y / v.z,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Viewport {
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ImageSize { width, height });
        }
        Ok(Viewport { width, height })
    }

    pub fn area(&self) -> f64 {
        self.width as f64 * self.height as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LodConfig {
    /// Projected side length in pixels at and above which a node is refined.
    pub pixel_threshold: f64,
    pub overdraw: f64,
    /// Relative width of the blend interval below `pixel_threshold`.
    pub transition_band: f64,
    pub base_point_size: f64,
    /// Size factor for surfels seen edge-on.
    pub normal_size_floor: f64,
}

impl Default for LodConfig {
    fn default() -> Self {
        LodConfig {
            pixel_threshold: 256.0,
            overdraw: 4.0,
            transition_band: 0.25,
            base_point_size: 2.0,
            normal_size_floor: 0.5,
        }
    }
}

impl LodConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.pixel_threshold > 0.0 && self.pixel_threshold.is_finite()) {
            return bad("pixel threshold must be positive");
        }
        if !(self.overdraw >= 1.0 && self.overdraw.is_finite()) {
            return bad("overdraw must be >= 1");
        }
        if !(self.transition_band > 0.0 && self.transition_band <= 1.0) {
            return bad("transition band must be in (0, 1]");
        }
        if !(self.base_point_size > 0.0 && self.base_point_size.is_finite()) {
            return bad("base point size must be positive");
        }
        if !(self.normal_size_floor > 0.0 && self.normal_size_floor <= 1.0) {
            return bad("normal size floor must be in (0, 1]");
        }
        Ok(())
    }

    /// Lower edge of the transition band.
    pub fn t0(&self) -> f64 {
        self.pixel_threshold * (1.0 - self.transition_band)
    }

    /// Upper edge of the transition band.
    pub fn t1(&self) -> f64 {
        self.pixel_threshold
    }
}

/// Where a box lands on screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enclosure {
    /// Every corner is in front of the near plane; the screen-space
    /// axis-aligned rectangle around the projected corners, unclamped.
    Rect { min: [f64; 2], max: [f64; 2] },
    /// Some corners are behind the near plane: the whole viewport.
    Straddling,
    /// Every corner is behind the near plane.
    Behind,
}

pub fn screen_enclosure(bounds: &Aabb, transform: &Mat4, camera: &Camera, viewport: Viewport) -> Enclosure {
    if bounds.is_empty() {
        return Enclosure::Behind;
    }
    let view = bounds.corners().map(|c| camera.to_view(transform.transform_point(c)));
    let in_front = view.iter().filter(|v| v.z >= camera.near).count();
    match in_front {
        0 => Enclosure::Behind,
        8 => {
            let (mut min, mut max) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for v in view {
                let s = camera.view_to_screen(v, viewport);
                for k in 0..2 {
                    min[k] = min[k].min(s[k]);
                    max[k] = max[k].max(s[k]);
                }
            }
            Enclosure::Rect { min, max }
        }
        _ => Enclosure::Straddling,
    }
}

/// Larger side and area, in pixels, of the box's screen enclosure.
pub fn projected_box_size(bounds: &Aabb, transform: &Mat4, camera: &Camera, viewport: Viewport) -> (f64, f64) {
    match screen_enclosure(bounds, transform, camera, viewport) {
        Enclosure::Behind => (0.0, 0.0),
        Enclosure::Straddling => (viewport.width.max(viewport.height) as f64, viewport.area()),
        Enclosure::Rect { min, max } => {
            let (w, h) = (max[0] - min[0], max[1] - min[1]);
            (w.max(h), w * h)
        }
    }
}

/// Surfels needed for `area_px` pixels: `round(area × coverage × overdraw)`,
/// clamped to the array length.
pub fn prefix_length(area_px: f64, coverage: f64, overdraw: f64, array_len: usize) -> usize {
    let k = (area_px * coverage * overdraw).round();
    if k.is_nan() || k <= 0.0 {
        0
    } else if k >= array_len as f64 {
        array_len
    } else {
        k as usize
    }
}

/// `(coarse_fraction, refined_active)` for a projected side length.
pub fn transition_weights(side_px: f64, cfg: &LodConfig) -> (f64, bool) {
    let (t0, t1) = (cfg.t0(), cfg.t1());
    if side_px <= t0 {
        (1.0, false)
    } else if side_px >= t1 {
        (0.0, true)
    } else {
        ((t1 - side_px) / (t1 - t0), true)
    }
}

/// Splat size for a surfel whose eye-space normal has z component `eye_normal_z`.
pub fn point_size(base_px: f64, eye_normal_z: f64, cfg: &LodConfig) -> f64 {
    let floor = cfg.normal_size_floor;
    base_px * (floor + (1.0 - floor) * eye_normal_z.abs().min(1.0))
}

/// Base splat size for `prefix` surfels drawn over `area_px` pixels.
///
/// The prefix formula budgets `coverage × overdraw` surfels per pixel; a
/// prefix is the full budget for `prefix / (coverage × overdraw)` pixels. When
/// more surfels than that share the area their size falls with the square root
/// of the ratio, down to one pixel. At or below budget the base size is used.
pub fn splat_size(area_px: f64, prefix: usize, coverage: f64, cfg: &LodConfig) -> f64 {
    let budget_area = prefix as f64 / (coverage * cfg.overdraw);
    let base = cfg.base_point_size;
    let s = base * (area_px / budget_area).sqrt();
    if s.is_nan() {
        base
    } else {
        s.clamp(1.0f64.min(base), base)
    }
}

#[derive(Debug, Clone)]
pub struct TriangleEntry {
    pub mesh: Arc<Mesh>,
    pub transform: Mat4,
}

#[derive(Debug, Clone)]
pub struct PointEntry {
    pub surfels: Arc<SurfelArray>,
    pub prefix_length: usize,
    /// Splat size in pixels before the per-surfel normal factor.
    pub point_size: f64,
    /// Share of the coarse representation; below 1 inside the transition band.
    pub weight: f64,
    pub transform: Mat4,
}

#[derive(Debug, Clone, Default)]
pub struct DrawList {
    pub triangles: Vec<TriangleEntry>,
    pub points: Vec<PointEntry>,
}

impl DrawList {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty() && self.points.is_empty()
    }

    pub fn triangle_count(&self) -> u64 {
        self.triangles.iter().map(|t| t.mesh.triangle_count()).sum()
    }

    pub fn point_count(&self) -> u64 {
        self.points.iter().map(|p| p.prefix_length as u64).sum()
    }
}

/// True when the transformed box lies entirely outside one frustum plane.
pub fn is_culled(bounds: &Aabb, transform: &Mat4, camera: &Camera, viewport: Viewport) -> bool {
    if bounds.is_empty() {
        return true;
    }
    let ty = (camera.fov_y * 0.5).tan();
    let tx = ty * viewport.width as f64 / viewport.height as f64;
    let view = bounds.corners().map(|c| camera.to_view(transform.transform_point(c)));
    let all = |f: &dyn Fn(&Vec3) -> bool| view.iter().all(f);
    all(&|v| v.z < camera.near)
        || all(&|v| v.z > camera.far)
        || all(&|v| v.x > tx * v.z)
        || all(&|v| v.x < -tx * v.z)
        || all(&|v| v.y > ty * v.z)
        || all(&|v| v.y < -ty * v.z)
}

/// Chooses geometry and surfel prefixes for one frame.
pub fn select_draw_list(root: &SceneNode, camera: &Camera, viewport: Viewport, cfg: &LodConfig) -> DrawList {
    let mut list = DrawList::default();
    visit(root, &Mat4::IDENTITY, camera, viewport, cfg, &mut list);
    list
}

fn visit(node: &SceneNode, parent: &Mat4, camera: &Camera, viewport: Viewport, cfg: &LodConfig, out: &mut DrawList) {
    let world = *parent * *node.transform();
    let bounds = node.local_bounds();
    if is_culled(&bounds, &world, camera, viewport) {
        return;
    }
    if let Some(arr) = node.surfels() {
        let (side, area) = projected_box_size(&bounds, &world, camera, viewport);
        if side < cfg.t1() {
            let (coarse, refined) = transition_weights(side, cfg);
            let coverage = arr.coverage as f64;
            let prefix = prefix_length(area * coarse, coverage, cfg.overdraw, arr.len());
            if prefix > 0 {
                out.points.push(PointEntry {
                    surfels: arr.clone(),
                    prefix_length: prefix,
                    point_size: splat_size(area * coarse, prefix, coverage, cfg),
                    weight: coarse,
                    transform: world,
                });
            }
            if !refined {
                return;
            }
        }
    }
    if let Some(mesh) = node.mesh() {
        if mesh.triangle_count() > 0 {
            out.triangles.push(TriangleEntry {
                mesh: mesh.clone(),
                transform: world,
            });
        }
    }
    for child in node.children() {
        visit(child, &world, camera, viewport, cfg, out);
    }
}

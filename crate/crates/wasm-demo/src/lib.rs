//! WebAssembly bindings for the interactive page in `www/`.
//!
//! The page builds one model, then drives three views of it: an orbit render
//! that switches between the level-of-detail and reference paths, a prefix
//! slider that draws only the first `k` surfels of the ordering, and the
//! nearest-predecessor distance curve of that ordering.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use blue_surfels::analysis::{dmin_curve, hole_report, window_means};
use blue_surfels::gen::GenConfig;
use blue_surfels::lod::{projected_box_size, select_draw_list, splat_size, Camera, DrawList, LodConfig, PointEntry, Viewport};
use blue_surfels::pipeline::build_node_surfels;
use blue_surfels::render::{render_drawlist, render_reference, FrameStats};
use blue_surfels::sampler::SamplerConfig;
use blue_surfels::scene::shapes;
use blue_surfels::{Mat4, SceneNode, SurfelArray, Vec3, BACKGROUND};

/// A model with its surfel ordering and the stats of the last frame drawn.
#[wasm_bindgen]
pub struct Demo {
    node: Arc<SceneNode>,
    surfels: Arc<SurfelArray>,
    last: Option<FrameStats>,
}

fn model(name: &str) -> Result<blue_surfels::Mesh, String> {
    match name {
        "bunny" => Ok(shapes::bunny_class()),
        "blob" => Ok(shapes::blob(96, 48)),
        "cube" => Ok(shapes::unit_cube([210, 160, 90, 255])),
        other => Err(format!("unknown model `{other}`; expected bunny, blob or cube")),
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(model_name: &str, resolution: u32, max_surfels: usize, candidates: usize, seed: u64) -> Result<Demo, String> {
        let node = Arc::new(SceneNode::leaf(model_name, Mat4::IDENTITY, Arc::new(model(model_name)?)));
        let arr = build_node_surfels(
            &node,
            &GenConfig { resolution },
            &SamplerConfig { max_surfels, candidate_count: candidates, seed },
        )
        .map_err(|e| e.to_string())?;
        let surfels = Arc::new(arr);
        node.attach_surfels(surfels.clone());
        Ok(Demo { node, surfels, last: None })
    }

    pub fn surfel_count(&self) -> usize {
        self.surfels.len()
    }

    /// As `f64` so JavaScript gets a plain number.
    pub fn triangle_count(&self) -> f64 {
        self.node.complexity() as f64
    }

    pub fn coverage(&self) -> f64 {
        self.surfels.coverage as f64
    }

    /// Window means of the distance from each surfel to its nearest predecessor.
    pub fn dmin_curve(&self, window: usize) -> Result<Vec<f64>, String> {
        let d = dmin_curve(&self.surfels).map_err(|e| e.to_string())?;
        Ok(window_means(&d, window.max(1)))
    }

    /// RGBA pixels of an orbit view. `distance` is in multiples of the model's
    /// bounding radius.
    #[allow(clippy::too_many_arguments)]
    pub fn render(
        &mut self,
        yaw: f64,
        pitch: f64,
        distance: f64,
        width: u32,
        height: u32,
        overdraw: f64,
        lod: bool,
    ) -> Result<Vec<u8>, String> {
        let (camera, vp) = self.orbit(yaw, pitch, distance, width, height)?;
        let (img, stats) = if lod {
            let cfg = lod_config(overdraw)?;
            let list = select_draw_list(&self.node, &camera, vp, &cfg);
            render_drawlist(&list, &camera, vp, &cfg)
        } else {
            render_reference(&self.node, &camera, vp)
        };
        self.last = Some(stats);
        Ok(img.into_rgba())
    }

    /// Draws only the first `prefix` surfels, sized as if that prefix had been
    /// selected for the view.
    pub fn render_prefix(&mut self, yaw: f64, pitch: f64, distance: f64, width: u32, height: u32, prefix: usize) -> Result<Vec<u8>, String> {
        let (camera, vp) = self.orbit(yaw, pitch, distance, width, height)?;
        let cfg = LodConfig::default();
        let k = prefix.min(self.surfels.len());
        let (_, area) = projected_box_size(&self.node.local_bounds(), &Mat4::IDENTITY, &camera, vp);
        let list = DrawList {
            triangles: Vec::new(),
            points: vec![PointEntry {
                surfels: self.surfels.clone(),
                prefix_length: k,
                point_size: splat_size(area, k, self.surfels.coverage as f64, &cfg),
                weight: 1.0,
                transform: Mat4::IDENTITY,
            }],
        };
        let (img, stats) = render_drawlist(&list, &camera, vp, &cfg);
        self.last = Some(stats);
        Ok(img.into_rgba())
    }

    /// `key=value` lines comparing the level-of-detail frame with the reference.
    pub fn compare(&mut self, yaw: f64, pitch: f64, distance: f64, width: u32, height: u32, overdraw: f64) -> Result<String, String> {
        let (camera, vp) = self.orbit(yaw, pitch, distance, width, height)?;
        let cfg = lod_config(overdraw)?;
        let list = select_draw_list(&self.node, &camera, vp, &cfg);
        let (lod, stats) = render_drawlist(&list, &camera, vp, &cfg);
        let (reference, _) = render_reference(&self.node, &camera, vp);
        let report = hole_report(&lod, &reference, BACKGROUND).map_err(|e| e.to_string())?;
        let (side, _) = projected_box_size(&self.node.local_bounds(), &Mat4::IDENTITY, &camera, vp);
        self.last = Some(stats);
        Ok(format!(
            "{}side_px={side:.1}\npoints={}\ntriangles={}\n",
            report.to_lines(),
            stats.points,
            stats.triangles
        ))
    }

    /// `points triangles select_ms raster_ms` of the last frame, or an empty string.
    pub fn last_stats(&self) -> String {
        self.last
            .map(|s| format!("{} {} {:.2} {:.2}", s.points, s.triangles, s.select_ms, s.raster_ms))
            .unwrap_or_default()
    }
}

fn lod_config(overdraw: f64) -> Result<LodConfig, String> {
    let cfg = LodConfig { overdraw, ..Default::default() };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

impl Demo {
    fn orbit(&self, yaw: f64, pitch: f64, distance: f64, width: u32, height: u32) -> Result<(Camera, Viewport), String> {
        let vp = Viewport::new(width, height).map_err(|e| e.to_string())?;
        let b = self.node.local_bounds();
        let radius = 0.5 * b.extent().length();
        let pitch = pitch.clamp(-1.5, 1.5);
        let dir = Vec3::new(pitch.cos() * yaw.sin(), pitch.sin(), pitch.cos() * yaw.cos());
        let eye = b.center() + dir * (distance * radius);
        let camera = Camera::look_at(eye, b.center(), Vec3::Y, 45f64.to_radians(), 1e-3 * radius, 1e3 * radius)
            .map_err(|e| e.to_string())?;
        Ok((camera, vp))
    }
}

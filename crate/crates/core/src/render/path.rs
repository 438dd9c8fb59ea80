use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{elapsed_ms, render_drawlist, render_reference, FrameStats};
use crate::error::{Error, Result};
use crate::frame::Image;
use crate::io::save_image;
use crate::lod::{select_draw_list, Camera, LodConfig, Viewport};
use crate::math::Vec3;
use crate::scene::SceneNode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub frame: u32,
    pub eye: [f64; 3],
    pub forward: [f64; 3],
    pub up: [f64; 3],
}

fn default_fov() -> f64 {
    60.0
}
fn default_near() -> f64 {
    0.01
}
fn default_far() -> f64 {
    1e5
}

/// Keyframed camera: eye interpolated linearly, forward and up interpolated
/// linearly and renormalized. Frames run from the first to the last keyframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraPath {
    /// Vertical field of view in degrees.
    #[serde(default = "default_fov")]
    pub fov_y_deg: f64,
    #[serde(default = "default_near")]
    pub near: f64,
    #[serde(default = "default_far")]
    pub far: f64,
    pub keyframes: Vec<Keyframe>,
}

impl CameraPath {
    pub fn new(keyframes: Vec<Keyframe>) -> Result<Self> {
        let p = CameraPath {
            fov_y_deg: default_fov(),
            near: default_near(),
            far: default_far(),
            keyframes,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.keyframes.is_empty() {
            return Err(Error::InvalidParameter("camera path has no keyframes".into()));
        }
        if self.keyframes.windows(2).any(|w| w[0].frame >= w[1].frame) {
            return Err(Error::InvalidParameter("keyframe indices must increase strictly".into()));
        }
        for k in &self.keyframes {
            self.camera_from(Vec3::from(k.eye), Vec3::from(k.forward), Vec3::from(k.up))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: CameraPath = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("paths always serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CameraPath::from_json(&text)
    }

    pub fn frames(&self) -> std::ops::RangeInclusive<u32> {
        self.keyframes[0].frame..=self.keyframes[self.keyframes.len() - 1].frame
    }

    fn camera_from(&self, eye: Vec3, forward: Vec3, up: Vec3) -> Result<Camera> {
        Camera::new(eye, forward, up, self.fov_y_deg.to_radians(), self.near, self.far)
    }

    /// Camera at `frame`, clamped to the keyframe range.
    pub fn camera_at(&self, frame: u32) -> Result<Camera> {
        let ks = &self.keyframes;
        let i = ks.partition_point(|k| k.frame <= frame);
        let (a, b) = match i {
            0 => (ks[0], ks[0]),
            i if i == ks.len() => (ks[i - 1], ks[i - 1]),
            i => (ks[i - 1], ks[i]),
        };
        let t = if b.frame > a.frame { (frame - a.frame) as f64 / (b.frame - a.frame) as f64 } else { 0.0 };
        let lerp = |x: [f64; 3], y: [f64; 3]| Vec3::from(x).lerp(Vec3::from(y), t);
        self.camera_from(
            lerp(a.eye, b.eye),
            lerp(a.forward, b.forward).normalized(),
            lerp(a.up, b.up).normalized(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    Reference,
    Lod,
    Both,
}

impl FromStr for RenderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ref" | "reference" => Ok(RenderMode::Reference),
            "lod" => Ok(RenderMode::Lod),
            "both" => Ok(RenderMode::Both),
            _ => Err(Error::InvalidParameter(format!("unknown render mode `{s}`; expected ref, lod or both"))),
        }
    }
}

/// Frames produced for one path index.
#[derive(Debug, Clone)]
pub struct PathFrame {
    pub index: u32,
    pub lod: Option<(Image, FrameStats)>,
    pub reference: Option<(Image, FrameStats)>,
}

/// Renders every frame of `path`, handing each to `sink` in order.
pub fn render_path_with<F>(
    root: &SceneNode,
    path: &CameraPath,
    viewport: Viewport,
    cfg: &LodConfig,
    mode: RenderMode,
    mut sink: F,
) -> Result<()>
where
    F: FnMut(PathFrame) -> Result<()>,
{
    path.validate()?;
    cfg.validate()?;
    for index in path.frames() {
        let camera = path.camera_at(index)?;
        let lod = (mode != RenderMode::Reference).then(|| {
            let (list, select_ms) = elapsed_ms(|| select_draw_list(root, &camera, viewport, cfg));
            let (img, mut stats) = render_drawlist(&list, &camera, viewport, cfg);
            stats.select_ms = select_ms;
            (img, stats)
        });
        let reference = (mode != RenderMode::Lod).then(|| render_reference(root, &camera, viewport));
        sink(PathFrame { index, lod, reference })?;
    }
    Ok(())
}

pub const STATS_HEADER: &str = "frame,triangles,points,select_ms,raster_ms";

fn stats_csv(rows: &[(u32, FrameStats)]) -> String {
    let mut s = String::from(STATS_HEADER);
    s.push('\n');
    for (i, st) in rows {
        let _ = writeln!(s, "{i},{},{},{:.3},{:.3}", st.triangles, st.points, st.select_ms, st.raster_ms);
    }
    s
}

/// A frame index with its level-of-detail and reference statistics.
pub type FrameRow = (u32, Option<FrameStats>, Option<FrameStats>);

/// Writes `frame_%05d.png` and `stats.csv` into `out_dir`; mode `Both` uses
/// the subdirectories `lod/` and `ref/`. Returns the per-frame statistics as
/// `(frame, lod, reference)`.
pub fn render_path(
    root: &SceneNode,
    path: &CameraPath,
    viewport: Viewport,
    cfg: &LodConfig,
    mode: RenderMode,
    out_dir: &Path,
) -> Result<Vec<FrameRow>> {
    let (lod_dir, ref_dir) = match mode {
        RenderMode::Both => (out_dir.join("lod"), out_dir.join("ref")),
        _ => (out_dir.to_path_buf(), out_dir.to_path_buf()),
    };
    for d in [&lod_dir, &ref_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut rows = Vec::new();
    render_path_with(root, path, viewport, cfg, mode, |f| {
        let name = format!("frame_{:05}.png", f.index);
        if let Some((img, _)) = &f.lod {
            save_image(img, lod_dir.join(&name))?;
        }
        if let Some((img, _)) = &f.reference {
            save_image(img, ref_dir.join(&name))?;
        }
        rows.push((f.index, f.lod.map(|x| x.1), f.reference.map(|x| x.1)));
        Ok(())
    })?;
    let write_csv = |dir: &Path, pick: &dyn Fn(&FrameRow) -> Option<FrameStats>| {
        let table: Vec<(u32, FrameStats)> = rows.iter().filter_map(|r| pick(r).map(|s| (r.0, s))).collect();
        let p = dir.join("stats.csv");
        std::fs::write(&p, stats_csv(&table)).map_err(|e| Error::io(&p, e))
    };
    if mode != RenderMode::Reference {
        write_csv(&lod_dir, &|r| r.1)?;
    }
    if mode != RenderMode::Lod {
        write_csv(&ref_dir, &|r| r.2)?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Mat4;
    use crate::scene::shapes;
    use std::sync::Arc;

    fn two_keys() -> CameraPath {
        CameraPath::new(vec![
            Keyframe { frame: 0, eye: [0.0, 0.0, 10.0], forward: [0.0, 0.0, -1.0], up: [0.0, 1.0, 0.0] },
            Keyframe { frame: 9, eye: [9.0, 0.0, 10.0], forward: [0.0, 0.0, -1.0], up: [0.0, 1.0, 0.0] },
        ])
        .unwrap()
    }

    #[test]
    fn eye_is_interpolated_linearly() {
        let p = two_keys();
        assert_eq!(p.frames().count(), 10);
        for f in 0..10 {
            let c = p.camera_at(f).unwrap();
            assert!((c.eye.x - f as f64).abs() < 1e-12);
        }
        assert_eq!(p.camera_at(50).unwrap().eye.x, 9.0);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let p = two_keys();
        assert_eq!(CameraPath::from_json(&p.to_json()).unwrap(), p);
        let minimal = r#"{"keyframes":[{"frame":3,"eye":[0,0,1],"forward":[0,0,-1],"up":[0,1,0]}]}"#;
        let m = CameraPath::from_json(minimal).unwrap();
        assert_eq!(m.fov_y_deg, 60.0);
        assert_eq!(m.frames(), 3..=3);
        assert!(CameraPath::from_json(r#"{"keyframes":[]}"#).is_err());
        let mut bad = p.clone();
        bad.keyframes[1].frame = 0;
        assert!(bad.validate().is_err());
        bad.keyframes[1].frame = 5;
        bad.keyframes[1].forward = [0.0, 1.0, 0.0];
        assert!(bad.validate().is_err());
        assert!("sideways".parse::<RenderMode>().is_err());
    }

    #[test]
    fn writes_frames_and_stats() {
        let dir = tempfile::tempdir().unwrap();
        let root = SceneNode::leaf("cube", Mat4::IDENTITY, Arc::new(shapes::unit_cube([200, 50, 50, 255])));
        let vp = Viewport::new(32, 24).unwrap();
        let rows = render_path(&root, &two_keys(), vp, &LodConfig::default(), RenderMode::Both, dir.path()).unwrap();
        assert_eq!(rows.len(), 10);
        for sub in ["lod", "ref"] {
            for f in 0..10 {
                assert!(dir.path().join(sub).join(format!("frame_{f:05}.png")).exists());
            }
            let csv = std::fs::read_to_string(dir.path().join(sub).join("stats.csv")).unwrap();
            assert_eq!(csv.lines().next().unwrap(), STATS_HEADER);
            assert_eq!(csv.lines().count(), 11);
        }
        assert_eq!(rows[0].2.unwrap().triangles, 12);
    }

    #[test]
    fn empty_scene_gives_background_frames() {
        let root = SceneNode::group("empty", Mat4::IDENTITY, vec![]);
        let vp = Viewport::new(16, 16).unwrap();
        let mut n = 0;
        render_path_with(&root, &two_keys(), vp, &LodConfig::default(), RenderMode::Both, |f| {
            n += 1;
            for (img, st) in [f.lod.unwrap(), f.reference.unwrap()] {
                assert!(img.pixels().all(|p| p == crate::frame::BACKGROUND));
                assert_eq!((st.triangles, st.points), (0, 0));
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 10);
    }
}

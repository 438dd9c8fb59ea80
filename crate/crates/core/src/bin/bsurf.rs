//! `bsurf`: preprocess scenes into surfel arrays, render camera paths, inspect
//! surfel files, compare frames and run the instancing bench.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a requested check failed.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use blue_surfels::analysis::{
    dmin_curve, hole_report, increases, scaling_bench, window_means, BenchConfig, GridSpec, BENCH_CSV_HEADER,
};
use blue_surfels::gen::{render_views, GenConfig};
use blue_surfels::io::{load_image, load_obj, load_scene, load_surfels, save_image, save_surfels, Manifest};
use blue_surfels::lod::{LodConfig, Viewport};
use blue_surfels::pipeline::build_surfels_for_scene;
use blue_surfels::render::{render_path, CameraPath, RenderMode};
use blue_surfels::sampler::SamplerConfig;
use blue_surfels::{BuildConfig, Error, SceneNode, SurfelArray, BACKGROUND};

#[derive(Parser)]
#[command(name = "bsurf", version, about = "Progressive blue-noise surfel level of detail")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Attach surfel arrays to every complex node and write them next to an updated manifest.
    Build {
        scene: PathBuf,
        /// Nodes with more triangles than this get surfels.
        #[arg(long, default_value_t = 10_000)]
        threshold: u64,
        #[arg(long, default_value_t = 512)]
        resolution: u32,
        #[arg(long, default_value_t = 65_536)]
        max_surfels: usize,
        #[arg(long, default_value_t = 200)]
        candidates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the depth, position, normal and color planes of every view as PNG.
        #[arg(long)]
        dump_gbuffers: Option<PathBuf>,
    },
    /// Render a camera path as reference frames, level-of-detail frames or both.
    Render {
        scene: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value = "512x512", value_parser = parse_viewport)]
        viewport: Viewport,
        #[arg(long, default_value = "both")]
        mode: String,
        #[arg(long, default_value_t = 4.0)]
        overdraw: f64,
        #[arg(long, default_value_t = 256.0)]
        pixel_threshold: f64,
        #[arg(long, default_value_t = 0.25)]
        transition_band: f64,
        #[arg(long, default_value_t = 2.0)]
        point_size: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Summarize a surfel file and optionally write its nearest-predecessor distance curve.
    Stats {
        file: PathBuf,
        #[arg(long)]
        dmin_csv: Option<PathBuf>,
    },
    /// Compare a level-of-detail frame against a reference frame.
    Compare {
        lod: PathBuf,
        reference: PathBuf,
        /// Exit with code 3 if the hole fraction is above this.
        #[arg(long)]
        max_hole_fraction: Option<f64>,
        /// Exit with code 3 if the PSNR is below this.
        #[arg(long)]
        min_psnr: Option<f64>,
    },
    /// Render a fly-by over instanced grids of a template mesh and print a CSV table.
    Bench {
        #[arg(long)]
        template: PathBuf,
        /// Lattice proportions along x, y and z.
        #[arg(long, default_value = "1x1x1")]
        grid: String,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        counts: Vec<usize>,
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long, default_value = "512x512", value_parser = parse_viewport)]
        viewport: Viewport,
        #[arg(long, default_value_t = 30)]
        frames: u32,
        /// Instance spacing in multiples of the template's largest extent.
        #[arg(long, default_value_t = 2.0)]
        spacing: f64,
        #[arg(long, default_value_t = 512)]
        resolution: u32,
        #[arg(long, default_value_t = 65_536)]
        max_surfels: usize,
        #[arg(long, default_value_t = 200)]
        candidates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_viewport(s: &str) -> Result<Viewport, String> {
    let (w, h) = s.split_once('x').ok_or_else(|| format!("`{s}` is not WxH"))?;
    let w = w.parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h = h.parse().map_err(|_| format!("bad height in `{s}`"))?;
    Viewport::new(w, h).map_err(|e| e.to_string())
}

enum Failure {
    Input(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Build { scene, threshold, resolution, max_surfels, candidates, seed, output, dump_gbuffers } => {
            let build = BuildConfig { complexity_threshold: threshold, ..Default::default() };
            let gen = GenConfig { resolution };
            let samp = SamplerConfig { max_surfels, candidate_count: candidates, seed };
            build_cmd(&scene, &build, &gen, &samp, &output, dump_gbuffers.as_deref())
        }
        Cmd::Render { scene, path, viewport, mode, overdraw, pixel_threshold, transition_band, point_size, output } => {
            let mode: RenderMode = mode.parse()?;
            let cfg = LodConfig {
                pixel_threshold,
                overdraw,
                transition_band,
                base_point_size: point_size,
                ..Default::default()
            };
            let loaded = load_scene(&scene)?;
            let path = CameraPath::load(&path)?;
            let rows = render_path(&loaded.root, &path, viewport, &cfg, mode, &output)?;
            println!("frames={}", rows.len());
            println!("output={}", output.display());
            Ok(())
        }
        Cmd::Stats { file, dmin_csv } => stats_cmd(&file, dmin_csv.as_deref()),
        Cmd::Compare { lod, reference, max_hole_fraction, min_psnr } => {
            let report = hole_report(&load_image(&lod)?, &load_image(&reference)?, BACKGROUND)?;
            print!("{}", report.to_lines());
            if let Some(m) = max_hole_fraction {
                if report.hole_fraction > m {
                    return Err(Failure::Check(format!("hole fraction {:.6} exceeds {m}", report.hole_fraction)));
                }
            }
            if let Some(m) = min_psnr {
                if report.psnr_db < m {
                    return Err(Failure::Check(format!("PSNR {:.4} dB is below {m}", report.psnr_db)));
                }
            }
            Ok(())
        }
        Cmd::Bench {
            template,
            grid,
            counts,
            path,
            viewport,
            frames,
            spacing,
            resolution,
            max_surfels,
            candidates,
            seed,
        } => {
            let cfg = BenchConfig {
                grid: grid.parse::<GridSpec>()?,
                counts,
                viewport,
                lod: LodConfig::default(),
                gen: GenConfig { resolution },
                sampler: SamplerConfig { max_surfels, candidate_count: candidates, seed },
                path: path.map(|p| CameraPath::load(&p)).transpose()?,
                frames,
                spacing,
            };
            let rows = scaling_bench(Arc::new(load_obj(&template)?), &cfg)?;
            println!("{BENCH_CSV_HEADER}");
            for r in rows {
                println!("{}", r.to_csv());
            }
            Ok(())
        }
    }
}

/// File stem for a node id: anything outside `[A-Za-z0-9_.-]` becomes `_`.
fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' }).collect()
}

fn absolute(base: &Path, p: &str) -> String {
    let joined = if Path::new(p).is_absolute() { PathBuf::from(p) } else { base.join(p) };
    std::fs::canonicalize(&joined).unwrap_or(joined).to_string_lossy().into_owned()
}

fn build_cmd(
    scene: &Path,
    build: &BuildConfig,
    gen: &GenConfig,
    samp: &SamplerConfig,
    out: &Path,
    dump: Option<&Path>,
) -> Result<(), Failure> {
    let loaded = load_scene(scene)?;
    let created = build_surfels_for_scene(&loaded.root, build, gen, samp)?;
    std::fs::create_dir_all(out).map_err(|e| Error::Io { path: out.to_path_buf(), source: e })?;

    let mut by_id: HashMap<String, Arc<SceneNode>> = HashMap::new();
    loaded.root.visit_nodes(&mut |n, _| {
        by_id.entry(n.name().to_string()).or_insert_with(|| n.clone());
    });

    let mut manifest: Manifest = loaded.manifest.clone();
    let mut written: HashMap<*const SurfelArray, String> = HashMap::new();
    let mut used = std::collections::HashSet::new();
    for entry in &mut manifest.nodes {
        if let Some(m) = &entry.mesh {
            entry.mesh = Some(absolute(&loaded.base_dir, m));
        }
        let Some(arr) = by_id.get(&entry.id).and_then(|n| n.surfels().cloned()) else {
            entry.surfels = None;
            continue;
        };
        let name = match written.get(&Arc::as_ptr(&arr)) {
            Some(name) => name.clone(),
            None => {
                let stem = file_stem(&entry.id);
                let mut name = format!("{stem}.bsrf");
                let mut k = 1;
                while !used.insert(name.clone()) {
                    name = format!("{stem}_{k}.bsrf");
                    k += 1;
                }
                save_surfels(&arr, out.join(&name))?;
                written.insert(Arc::as_ptr(&arr), name.clone());
                name
            }
        };
        entry.surfels = Some(name);
        if let Some(dir) = dump {
            dump_gbuffers(by_id[&entry.id].as_ref(), gen, dir, &file_stem(&entry.id))?;
        }
    }
    let manifest_path = out.join("scene.json");
    manifest.save(&manifest_path)?;
    println!("arrays_created={created}");
    println!("files_written={}", written.len());
    println!("manifest={}", manifest_path.display());
    Ok(())
}

fn dump_gbuffers(node: &SceneNode, gen: &GenConfig, dir: &Path, stem: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    let bounds = node.local_bounds();
    for (v, (_, g)) in render_views(node, gen)?.iter().enumerate() {
        let planes = g.to_images(&bounds)?;
        for (plane, img) in ["depth", "position", "normal", "color"].iter().zip(&planes) {
            save_image(img, dir.join(format!("{stem}_view{v}_{plane}.png")))?;
        }
    }
    Ok(())
}

fn stats_cmd(file: &Path, dmin_csv: Option<&Path>) -> Result<(), Failure> {
    let arr = load_surfels(file, None)?;
    println!("surfels={}", arr.len());
    println!("coverage={:.6}", arr.coverage);
    println!("source_resolution={}", arr.source_resolution);
    if arr.len() < 2 {
        return Ok(());
    }
    let d = dmin_curve(&arr)?;
    let means = window_means(&d, 32);
    println!("dmin_first={:.6}", d[0]);
    println!("dmin_last={:.6}", d[d.len() - 1]);
    println!("window32_increases={}/{}", increases(&means), means.len().saturating_sub(1));
    if let Some(p) = dmin_csv {
        let mut s = String::from("k,dmin\n");
        for (i, v) in d.iter().enumerate() {
            let _ = writeln!(s, "{},{v}", i + 2);
        }
        std::fs::write(p, s).map_err(|e| Error::Io { path: p.to_path_buf(), source: e })?;
    }
    Ok(())
}

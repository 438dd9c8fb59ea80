use std::path::Path;
use std::process::{Command, Output};

use blue_surfels::io::{load_surfels, save_image, save_obj, Manifest};
use blue_surfels::scene::shapes;
use blue_surfels::Image;

fn bsurf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsurf")).current_dir(dir).args(args).output().expect("bsurf runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{text}"))
}

/// Two instances of one mesh plus a small cube, written as OBJ files and a manifest.
fn scene(dir: &Path) {
    save_obj(&shapes::blob(40, 20), dir.join("blob.obj")).unwrap();
    save_obj(&shapes::unit_cube([200, 40, 40, 255]), dir.join("cube.obj")).unwrap();
    let json = r#"{"nodes": [
        {"id": "root"},
        {"id": "a", "parent": "root", "mesh": "blob.obj",
         "transform": [1,0,0,0, 0,1,0,0, 0,0,1,0, -2,0,0,1]},
        {"id": "b", "parent": "root", "mesh": "blob.obj",
         "transform": [1,0,0,0, 0,1,0,0, 0,0,1,0, 2,0,0,1]},
        {"id": "box", "parent": "root", "mesh": "cube.obj"}
    ]}"#;
    std::fs::write(dir.join("scene.json"), json).unwrap();
    let path = r#"{"fov_y_deg": 50, "keyframes": [
        {"frame": 0, "eye": [0, 1, -8], "forward": [0, -0.1, 1], "up": [0, 1, 0]},
        {"frame": 1, "eye": [1, 1, -7], "forward": [0, -0.1, 1], "up": [0, 1, 0]}
    ]}"#;
    std::fs::write(dir.join("path.json"), path).unwrap();
}

const BUILD: &[&str] = &["build", "scene.json", "--threshold", "100", "--resolution", "64", "--max-surfels", "600", "--seed", "3", "-o", "out"];

#[test]
fn build_writes_shared_arrays_once() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path());
    let o = bsurf(tmp.path(), BUILD);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(value(&text, "arrays_created"), "2");
    assert_eq!(value(&text, "files_written"), "2");

    let m = Manifest::load(tmp.path().join("out/scene.json")).unwrap();
    let node = |id: &str| m.nodes.iter().find(|n| n.id == id).unwrap();
    assert_eq!(node("a").surfels, node("b").surfels);
    assert!(node("box").surfels.is_none());
    assert!(Path::new(node("a").mesh.as_ref().unwrap()).is_absolute());
    // the group over a and b gets its own array
    let root = node("root").surfels.clone().unwrap();
    assert_ne!(Some(root.clone()), node("a").surfels);
    let arr = load_surfels(tmp.path().join("out").join(node("a").surfels.as_ref().unwrap()), None).unwrap();
    assert_eq!(arr.len(), 600);
    assert_eq!(arr.source_resolution, 64);
}

#[test]
fn render_stats_and_compare_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path());
    assert!(bsurf(tmp.path(), BUILD).status.success());

    let o = bsurf(tmp.path(), &["render", "out/scene.json", "--path", "path.json", "--viewport", "96x64", "--mode", "lod", "-o", "frames"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&stdout(&o), "frames"), "2");
    for f in ["frame_00000.png", "frame_00001.png", "stats.csv"] {
        assert!(tmp.path().join("frames").join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(tmp.path().join("frames/stats.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let bsrf = std::fs::read_dir(tmp.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "bsrf"))
        .unwrap();
    let o = bsurf(tmp.path(), &["stats", bsrf.to_str().unwrap(), "--dmin-csv", "d.csv"]);
    assert!(o.status.success());
    let n: usize = value(&stdout(&o), "surfels").parse().unwrap();
    let d = std::fs::read_to_string(tmp.path().join("d.csv")).unwrap();
    assert_eq!(d.lines().count(), n);

    let f0 = "frames/frame_00000.png";
    let o = bsurf(tmp.path(), &["compare", f0, f0, "--max-hole-fraction", "0", "--min-psnr", "90"]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "hole_pixels"), "0");
    assert_eq!(value(&stdout(&o), "psnr_db"), "99.0000");
}

#[test]
fn compare_fails_checks_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let full = Image::new(4, 4, [50, 60, 70, 255]).unwrap();
    let mut holed = full.clone();
    holed.set(1, 1, blue_surfels::BACKGROUND);
    save_image(&full, tmp.path().join("ref.png")).unwrap();
    save_image(&holed, tmp.path().join("lod.png")).unwrap();
    let o = bsurf(tmp.path(), &["compare", "lod.png", "ref.png", "--max-hole-fraction", "0.05"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(value(&stdout(&o), "hole_fraction"), "0.062500");
    assert!(bsurf(tmp.path(), &["compare", "lod.png", "ref.png", "--max-hole-fraction", "0.07"]).status.success());
}

#[test]
fn bad_input_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(bsurf(tmp.path(), &["stats", "missing.bsrf"]).status.code(), Some(2));
    std::fs::write(tmp.path().join("junk.bsrf"), b"not a surfel file at all").unwrap();
    assert_eq!(bsurf(tmp.path(), &["stats", "junk.bsrf"]).status.code(), Some(2));
    scene(tmp.path());
    let bad_vp = bsurf(tmp.path(), &["render", "scene.json", "--path", "path.json", "--viewport", "0x10", "-o", "x"]);
    assert_eq!(bad_vp.status.code(), Some(2));
    let bad_mode = bsurf(tmp.path(), &["render", "scene.json", "--path", "path.json", "--mode", "fast", "-o", "x"]);
    assert_eq!(bad_mode.status.code(), Some(2));
    assert_eq!(bsurf(tmp.path(), &["bench", "--template", "blob.obj", "--grid", "3x3"]).status.code(), Some(2));
}

#[test]
fn bench_prints_one_row_per_count() {
    let tmp = tempfile::tempdir().unwrap();
    save_obj(&shapes::blob(20, 10), tmp.path().join("t.obj")).unwrap();
    let o = bsurf(
        tmp.path(),
        &[
            "bench", "--template", "t.obj", "--grid", "4x1x4", "--counts", "1,16", "--frames", "3", "--viewport", "64x64",
            "--resolution", "32", "--max-surfels", "200", "--candidates", "20",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], blue_surfels::analysis::BENCH_CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,360,"));
    assert!(lines[2].starts_with("16,5760,"));
}

#[test]
fn gbuffer_dump_writes_four_planes_per_view() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path());
    let mut args = BUILD.to_vec();
    args.extend(["--dump-gbuffers", "gb"]);
    assert!(bsurf(tmp.path(), &args).status.success());
    let count = std::fs::read_dir(tmp.path().join("gb")).unwrap().count();
    // root, a and b each dump eight views of four planes
    assert_eq!(count, 3 * 8 * 4);
    assert!(tmp.path().join("gb/a_view0_normal.png").is_file());
}

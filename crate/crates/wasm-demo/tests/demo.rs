use blue_surfels::BACKGROUND;
use blue_surfels_demo::Demo;

fn demo() -> Demo {
    Demo::new("cube", 48, 1500, 40, 9).unwrap()
}

fn covered(rgba: &[u8]) -> usize {
    rgba.chunks_exact(4).filter(|p| *p != BACKGROUND).count()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('='))).unwrap()
}

#[test]
fn builds_and_reports() {
    let d = demo();
    assert_eq!(d.surfel_count(), 1500);
    assert_eq!(d.triangle_count(), 12.0);
    assert!(d.coverage() > 0.7 && d.coverage() < 0.8);
    assert!(Demo::new("teapot", 48, 100, 10, 0).is_err());
}

#[test]
fn renders_frames_of_the_requested_size() {
    let mut d = demo();
    for lod in [true, false] {
        let px = d.render(0.6, 0.4, 3.0, 40, 30, 4.0, lod).unwrap();
        assert_eq!(px.len(), 40 * 30 * 4);
        assert!(covered(&px) > 100);
    }
    assert!(d.render(0.0, 0.0, 3.0, 0, 30, 4.0, true).is_err());
    assert!(d.render(0.0, 0.0, 3.0, 40, 30, 0.0, true).is_err());
}

#[test]
fn far_views_use_points_and_near_views_triangles() {
    let mut d = demo();
    d.render(0.3, 0.2, 40.0, 64, 64, 4.0, true).unwrap();
    let far: Vec<u64> = d.last_stats().split(' ').take(2).map(|v| v.parse().unwrap()).collect();
    assert!(far[0] > 0 && far[1] == 0, "{far:?}");
    d.render(0.3, 0.2, 1.2, 400, 400, 4.0, true).unwrap();
    let near: Vec<u64> = d.last_stats().split(' ').take(2).map(|v| v.parse().unwrap()).collect();
    assert_eq!(near, vec![0, 12]);
}

#[test]
fn longer_prefixes_fill_more_of_the_frame() {
    let mut d = demo();
    let counts: Vec<usize> = [5, 50, 500, 1500].iter().map(|&k| covered(&d.render_prefix(0.5, 0.3, 3.0, 96, 96, k).unwrap())).collect();
    assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
    assert!(counts[0] < counts[3] / 4);
}

#[test]
fn compare_reports_quality() {
    let mut d = demo();
    let text = d.compare(0.5, 0.3, 20.0, 96, 96, 4.0).unwrap();
    let holes: f64 = field(&text, "hole_fraction").parse().unwrap();
    let side: f64 = field(&text, "side_px").parse().unwrap();
    assert!(side < 64.0 && holes < 0.1, "{text}");
    // close up the reference mesh itself is drawn
    let text = d.compare(0.5, 0.3, 1.2, 400, 400, 4.0).unwrap();
    assert_eq!(field(&text, "psnr_db"), "99.0000");
}

#[test]
fn dmin_curve_trends_down() {
    let d = demo();
    let c = d.dmin_curve(100).unwrap();
    assert_eq!(c.len(), 1499 / 100);
    assert!(c[0] > c[c.len() - 1]);
}

//! Triangle scan conversion shared by the G-buffer and frame rasterizers.
//!
//! Screen space has x to the right and y down; pixel `(i, j)` is sampled at its
//! center `(i + 0.5, j + 0.5)`. Triangles are double-sided. A center exactly on
//! an edge belongs to the triangle for which that edge satisfies the ownership
//! rule below, so two triangles sharing an edge never both claim a pixel.

#[inline]
fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Edge `a → b` owns centers lying exactly on it.
#[inline]
fn owns_edge(a: [f64; 2], b: [f64; 2]) -> bool {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    dy > 0.0 || (dy == 0.0 && dx < 0.0)
}

/// Calls `f(x, y, weights)` for every covered pixel center, with barycentric
/// weights relative to the vertices as given. Pixels are visited row by row.
pub fn scan_triangle<F: FnMut(u32, u32, [f64; 3])>(width: u32, height: u32, p: [[f64; 2]; 3], mut f: F) {
    let area = orient(p[0], p[1], p[2]);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    // flip back-facing triangles to positive orientation; remember the permutation
    let (q, flipped) = if area > 0.0 { (p, false) } else { ([p[0], p[2], p[1]], true) };
    let area = area.abs();
    let min_x = q.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    let max_x = q.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
    let min_y = q.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
    let max_y = q.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
    let x0 = (min_x - 0.5).ceil().max(0.0);
    let x1 = (max_x - 0.5).floor().min(width as f64 - 1.0);
    let y0 = (min_y - 0.5).ceil().max(0.0);
    let y1 = (max_y - 0.5).floor().min(height as f64 - 1.0);
    if x0 > x1 || y0 > y1 {
        return;
    }
    let own = [owns_edge(q[1], q[2]), owns_edge(q[2], q[0]), owns_edge(q[0], q[1])];
    let inside = |w: f64, owned: bool| w > 0.0 || (w == 0.0 && owned);
    for y in y0 as u32..=y1 as u32 {
        let cy = y as f64 + 0.5;
        for x in x0 as u32..=x1 as u32 {
            let c = [x as f64 + 0.5, cy];
            let w0 = orient(q[1], q[2], c);
            let w1 = orient(q[2], q[0], c);
            let w2 = orient(q[0], q[1], c);
            if inside(w0, own[0]) && inside(w1, own[1]) && inside(w2, own[2]) {
                let (l0, l1, l2) = (w0 / area, w1 / area, w2 / area);
                let weights = if flipped { [l0, l2, l1] } else { [l0, l1, l2] };
                f(x, y, weights);
            }
        }
    }
}

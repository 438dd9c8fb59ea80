//! Offline metrics: nearest-neighbor distance curves of surfel orderings,
//! image comparison and the instancing scaling bench.

mod bench;

pub use bench::{
    default_flyby, effective_triangles, instanced_grid, lattice_dims, scaling_bench, scaling_bench_with_prototype,
    BenchConfig, BenchRow, GridSpec, BENCH_CSV_HEADER,
};

use crate::error::{Error, Result};
use crate::frame::Image;
use crate::math::{Aabb, Vec3};
use crate::sampler::PointIndex;
use crate::surfel::SurfelArray;

/// Reported for identical images.
pub const PSNR_CAP_DB: f64 = 99.0;

/// `d[k − 1]` is the distance from point `k` to its nearest predecessor, for
/// `k = 1..n`.
pub fn dmin_curve_points(points: &[Vec3]) -> Result<Vec<f64>> {
    if points.len() < 2 {
        return Err(Error::TooFewSurfels { needed: 2, got: points.len() });
    }
    let mut index = PointIndex::new(&Aabb::from_points(points.iter().copied()));
    index.insert(points[0]);
    let mut d = Vec::with_capacity(points.len() - 1);
    for &p in &points[1..] {
        d.push(index.nn_distance(p)?);
        index.insert(p);
    }
    Ok(d)
}

pub fn dmin_curve(array: &SurfelArray) -> Result<Vec<f64>> {
    let points: Vec<Vec3> = array.surfels.iter().map(|s| s.position()).collect();
    dmin_curve_points(&points)
}

/// Means of consecutive non-overlapping windows; a trailing partial window is dropped.
pub fn window_means(series: &[f64], window: usize) -> Vec<f64> {
    if window == 0 {
        return Vec::new();
    }
    series.chunks_exact(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}

/// Number of adjacent pairs where the later value is larger.
pub fn increases(series: &[f64]) -> usize {
    series.windows(2).filter(|w| w[1] > w[0]).count()
}

fn check_dims(a: &Image, b: &Image) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch(a.dimensions(), b.dimensions()));
    }
    Ok(())
}

/// Peak signal-to-noise ratio over the RGB channels, capped at [`PSNR_CAP_DB`].
pub fn image_psnr(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let mut sum = 0u64;
    for (p, q) in a.pixels().zip(b.pixels()) {
        for k in 0..3 {
            let d = p[k] as i64 - q[k] as i64;
            sum += (d * d) as u64;
        }
    }
    if sum == 0 {
        return Ok(PSNR_CAP_DB);
    }
    let mse = sum as f64 / (a.width() as f64 * a.height() as f64 * 3.0);
    Ok((10.0 * (255.0f64 * 255.0 / mse).log10()).min(PSNR_CAP_DB))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub psnr_db: f64,
    pub hole_pixels: u64,
    pub ref_covered_pixels: u64,
    pub hole_fraction: f64,
}

impl QualityReport {
    /// `key=value` lines.
    pub fn to_lines(&self) -> String {
        format!(
            "psnr_db={:.4}\nhole_pixels={}\nref_covered_pixels={}\nhole_fraction={:.6}\n",
            self.psnr_db, self.hole_pixels, self.ref_covered_pixels, self.hole_fraction
        )
    }
}

/// A hole is a pixel covered in the reference and background in the LOD frame.
pub fn hole_report(lod: &Image, reference: &Image, background: [u8; 4]) -> Result<QualityReport> {
    check_dims(lod, reference)?;
    let (mut holes, mut covered) = (0u64, 0u64);
    for (l, r) in lod.pixels().zip(reference.pixels()) {
        if r != background {
            covered += 1;
            if l == background {
                holes += 1;
            }
        }
    }
    Ok(QualityReport {
        psnr_db: image_psnr(lod, reference)?,
        hole_pixels: holes,
        ref_covered_pixels: covered,
        hole_fraction: holes as f64 / covered.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::BACKGROUND;
    use crate::rng::SplitMix64;
    use crate::surfel::Surfel;
    use proptest::prelude::*;

    fn quadratic(points: &[Vec3]) -> Vec<f64> {
        (1..points.len())
            .map(|k| (0..k).map(|j| points[j].distance_squared(points[k])).fold(f64::INFINITY, f64::min).sqrt())
            .collect()
    }

    #[test]
    fn hand_geometry() {
        let pts = [Vec3::ZERO, Vec3::new(1.0, 1.0, 0.0), Vec3::X, Vec3::Y];
        assert_eq!(dmin_curve_points(&pts).unwrap(), vec![2f64.sqrt(), 1.0, 1.0]);
        let dup = [Vec3::ZERO, Vec3::X, Vec3::ZERO];
        assert_eq!(dmin_curve_points(&dup).unwrap()[1], 0.0);
        assert!(dmin_curve_points(&[Vec3::ZERO]).is_err());
    }

    #[test]
    fn matches_quadratic_oracle() {
        let mut rng = SplitMix64::new(17);
        for n in [2, 3, 50, 500, 2000] {
            let pts: Vec<Vec3> = (0..n).map(|_| Vec3::new(rng.next_f64(), rng.next_f64(), rng.next_f64() * 0.1)).collect();
            assert_eq!(dmin_curve_points(&pts).unwrap(), quadratic(&pts), "n={n}");
        }
        let arr = SurfelArray {
            surfels: (0..40).map(|i| Surfel::new(Vec3::new(i as f64, 0.0, 0.0), Vec3::Z, [0; 4])).collect(),
            coverage: 1.0,
            source_resolution: 16,
        };
        assert!(dmin_curve(&arr).unwrap().iter().all(|&d| d == 1.0));
    }

    #[test]
    fn window_helpers() {
        assert_eq!(window_means(&[1.0, 3.0, 2.0, 2.0, 9.0], 2), vec![2.0, 2.0]);
        assert_eq!(increases(&[3.0, 2.0, 2.5, 1.0, 1.0]), 1);
    }

    fn solid(w: u32, h: u32, c: [u8; 4]) -> Image {
        Image::new(w, h, c).unwrap()
    }

    #[test]
    fn psnr_examples() {
        let a = solid(4, 3, [10, 20, 30, 255]);
        assert_eq!(image_psnr(&a, &a).unwrap(), PSNR_CAP_DB);
        let black = solid(4, 4, [0, 0, 0, 255]);
        let white = solid(4, 4, [255, 255, 255, 255]);
        assert_eq!(image_psnr(&black, &white).unwrap(), 0.0);
        let p = solid(1, 1, [100, 100, 100, 255]);
        let q = solid(1, 1, [116, 100, 100, 255]);
        let expected = 10.0 * (3.0 * 255.0f64 * 255.0 / 256.0).log10();
        assert!((image_psnr(&p, &q).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 28.8).abs() < 0.05);
        assert!(image_psnr(&a, &black).is_err());
    }

    #[test]
    fn hole_examples() {
        let full = solid(2, 2, [9, 9, 9, 255]);
        assert_eq!(hole_report(&full, &full, BACKGROUND).unwrap().hole_pixels, 0);
        let empty = solid(2, 2, BACKGROUND);
        assert_eq!(hole_report(&empty, &full, BACKGROUND).unwrap().hole_fraction, 1.0);
        let mut checker = full.clone();
        checker.set(0, 0, BACKGROUND);
        checker.set(1, 1, BACKGROUND);
        let r = hole_report(&checker, &full, BACKGROUND).unwrap();
        assert_eq!((r.hole_pixels, r.ref_covered_pixels, r.hole_fraction), (2, 4, 0.5));
        // nothing covered in the reference
        assert_eq!(hole_report(&full, &empty, BACKGROUND).unwrap().hole_fraction, 0.0);
        assert!(r.to_lines().contains("hole_pixels=2\n"));
    }

    fn random_image(seed: u64, w: u32, h: u32) -> Image {
        let mut rng = SplitMix64::new(seed);
        let data = (0..w * h)
            .flat_map(|_| {
                if rng.below(3) == 0 {
                    BACKGROUND
                } else {
                    [rng.below(256) as u8, rng.below(256) as u8, rng.below(256) as u8, 255]
                }
            })
            .collect();
        Image::from_rgba(w, h, data).unwrap()
    }

    proptest! {
        #[test]
        fn psnr_is_symmetric_and_holes_are_not(s1 in any::<u64>(), s2 in any::<u64>(), w in 1u32..12, h in 1u32..12) {
            let (a, b) = (random_image(s1, w, h), random_image(s2, w, h));
            prop_assert_eq!(image_psnr(&a, &b).unwrap(), image_psnr(&b, &a).unwrap());
            let ab = hole_report(&a, &b, BACKGROUND).unwrap();
            let ba = hole_report(&b, &a, BACKGROUND).unwrap();
            // holes in one direction are exactly the pixels covered only by the other image
            let only = |x: &Image, y: &Image| x.pixels().zip(y.pixels()).filter(|(p, q)| *p != BACKGROUND && *q == BACKGROUND).count() as u64;
            prop_assert_eq!(ab.hole_pixels, only(&b, &a));
            prop_assert_eq!(ba.hole_pixels, only(&a, &b));
            prop_assert!(ab.hole_fraction >= 0.0 && ab.hole_fraction <= 1.0);
        }
    }
}

//! Procedural test geometry.

use std::f64::consts::PI;

use crate::math::Vec3;
use crate::rng::SplitMix64;
use crate::scene::{Material, Mesh};

/// Axis-aligned unit cube `[0,1]³`, 24 vertices with flat face normals, 12 triangles.
pub fn unit_cube(color: [u8; 4]) -> Mesh {
    let faces: [(Vec3, Vec3, Vec3); 6] = [
        // (normal, u axis, v axis) with u × v = normal
        (Vec3::X, Vec3::Y, Vec3::Z),
        (-Vec3::X, Vec3::Z, Vec3::Y),
        (Vec3::Y, Vec3::Z, Vec3::X),
        (-Vec3::Y, Vec3::X, Vec3::Z),
        (Vec3::Z, Vec3::X, Vec3::Y),
        (-Vec3::Z, Vec3::Y, Vec3::X),
    ];
    let center = Vec3::splat(0.5);
    let mut positions = Vec::with_capacity(24);
    let mut normals = Vec::with_capacity(24);
    let mut triangles = Vec::with_capacity(12);
    for (n, u, v) in faces {
        let base = positions.len() as u32;
        let c = center + n * 0.5;
        for (su, sv) in [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)] {
            positions.push(c + u * su + v * sv);
            normals.push(n);
        }
        triangles.push([base, base + 1, base + 2]);
        triangles.push([base, base + 2, base + 3]);
    }
    let material = material_from_color(color);
    Mesh::new(positions, Some(normals), None, triangles, material).expect("cube is valid")
}

/// Square `[0,size]²` in the z = 0 plane facing +z, two triangles.
pub fn plate(size: f64, color: [u8; 4]) -> Mesh {
    let positions = vec![
        Vec3::ZERO,
        Vec3::new(size, 0.0, 0.0),
        Vec3::new(size, size, 0.0),
        Vec3::new(0.0, size, 0.0),
    ];
    Mesh::new(
        positions,
        Some(vec![Vec3::Z; 4]),
        None,
        vec![[0, 1, 2], [0, 2, 3]],
        material_from_color(color),
    )
    .expect("plate is valid")
}

fn material_from_color(color: [u8; 4]) -> Material {
    let mut m = Material::from_diffuse([color[0] as f32 / 255.0, color[1] as f32 / 255.0, color[2] as f32 / 255.0]);
    m.base_color = color;
    m
}

/// Lumpy closed surface with concavities and ear-like lobes, colored by
/// position. Triangle count is `2 · around · (rings − 1)`.
pub fn blob(around: usize, rings: usize) -> Mesh {
    assert!(around >= 3 && rings >= 2);
    let radius = |theta: f64, phi: f64| {
        let lumps = 0.16 * (3.0 * theta).sin() * (4.0 * phi).cos()
            + 0.10 * (5.0 * theta + 1.0).sin() * (3.0 * phi).sin();
        // two lobes near the top, offset around the axis
        let ear = |phi0: f64| {
            let d2 = (theta - 0.45).powi(2) * 9.0 + (phi - phi0).rem_euclid(2.0 * PI).min((phi0 - phi).rem_euclid(2.0 * PI)).powi(2) * 2.0;
            0.55 * (-d2 * 6.0).exp()
        };
        1.0 + lumps + ear(1.2) + ear(1.9)
    };
    let point = |theta: f64, phi: f64| {
        let r = radius(theta, phi);
        Vec3::new(r * theta.sin() * phi.cos(), r * theta.cos(), r * theta.sin() * phi.sin())
    };
    let mut positions = vec![point(0.0, 0.0)];
    for ring in 1..rings {
        let theta = PI * ring as f64 / rings as f64;
        for j in 0..around {
            positions.push(point(theta, 2.0 * PI * j as f64 / around as f64));
        }
    }
    positions.push(point(PI, 0.0));
    let south = positions.len() as u32 - 1;
    let at = |ring: usize, j: usize| (1 + (ring - 1) * around + j % around) as u32;
    let mut triangles = Vec::with_capacity(2 * around * (rings - 1));
    for j in 0..around {
        triangles.push([0, at(1, j + 1), at(1, j)]);
    }
    for ring in 1..rings - 1 {
        for j in 0..around {
            let (a, b, c, d) = (at(ring, j), at(ring, j + 1), at(ring + 1, j + 1), at(ring + 1, j));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    for j in 0..around {
        triangles.push([south, at(rings - 1, j), at(rings - 1, j + 1)]);
    }
    let colors = positions
        .iter()
        .map(|p| {
            let c = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            [c(0.55 + 0.3 * p.y), c(0.45 + 0.25 * p.x), c(0.5 - 0.3 * p.z), 255]
        })
        .collect();
    Mesh::new(positions, None, Some(colors), triangles, Material::default()).expect("blob is valid")
}

/// Stand-in for a scanned model of roughly 70k triangles.
pub fn bunny_class() -> Mesh {
    blob(264, 134)
}

/// `n` points uniformly distributed on the sphere of radius `r` around the origin.
pub fn sphere_points(n: usize, r: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let z = 2.0 * rng.next_f64() - 1.0;
            let phi = 2.0 * PI * rng.next_f64();
            let s = (1.0 - z * z).sqrt();
            Vec3::new(r * s * phi.cos(), r * s * phi.sin(), r * z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bunny_class_triangle_count() {
        let m = bunny_class();
        assert_eq!(m.triangle_count(), 2 * 264 * 133);
        assert!(m.triangle_count() > 66_100);
    }

    #[test]
    fn cube_normals_point_outward() {
        let m = unit_cube([255; 4]);
        for t in m.triangles() {
            let [a, b, c] = t.map(|i| m.positions()[i as usize]);
            let geo = (b - a).cross(c - a).normalized();
            let n = m.normals()[t[0] as usize];
            assert!((geo - n).length() < 1e-12);
            assert!(n.dot((a + b + c) / 3.0 - Vec3::splat(0.5)) > 0.0);
        }
    }
}

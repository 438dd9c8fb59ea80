//! Surfels and the ordered arrays attached to scene nodes.

use crate::math::Vec3;

/// An oriented point sample. Stored in single precision, matching the file layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surfel {
    pub position: [f32; 3],
    pub normal: [f32; 3],
    pub color: [u8; 4],
}

impl Surfel {
    pub fn new(position: Vec3, normal: Vec3, color: [u8; 4]) -> Self {
        Surfel {
            position: position.to_f32(),
            normal: normal.normalized().to_f32(),
            color,
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::from_f32(self.position)
    }

    pub fn normal(&self) -> Vec3 {
        Vec3::from_f32(self.normal)
    }
}

/// Unordered surfels straight out of the corner-view rasterization.
#[derive(Debug, Clone)]
pub struct InitialSurfelSet {
    pub surfels: Vec<Surfel>,
    /// Occupied pixels over projected bounding-rectangle pixels, all eight views.
    pub coverage: f64,
    pub resolution: u32,
}

/// Surfels in progressive order: every prefix approximates the whole subtree.
///
/// Positions are in the local frame of the node the array is attached to, so
/// one array serves every instance of that node.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfelArray {
    pub surfels: Vec<Surfel>,
    pub coverage: f32,
    pub source_resolution: u32,
}

impl SurfelArray {
    pub fn len(&self) -> usize {
        self.surfels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfels.is_empty()
    }

    pub fn prefix(&self, k: usize) -> &[Surfel] {
        &self.surfels[..k.min(self.surfels.len())]
    }
}

//! Scene graph: meshes, nodes with shared (instanced) subtrees, bounds and
//! complexity bookkeeping.

mod octree;
pub mod shapes;

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::math::{Aabb, Mat4, Vec3};
use crate::surfel::SurfelArray;

pub use octree::{build_loose_octree, build_octree_cells, OctreeCell, MAX_OCTREE_DEPTH};

const NORMAL_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub ambient: [f32; 3],
    pub diffuse: [f32; 3],
    pub specular: [f32; 3],
    pub base_color: [u8; 4],
}

impl Default for Material {
    fn default() -> Self {
        Material::from_diffuse([1.0, 1.0, 1.0])
    }
}

impl Material {
    pub fn from_diffuse(diffuse: [f32; 3]) -> Self {
        let to8 = |c: f32| (c.clamp(0.0, 1.0) * 255.0).round() as u8;
        Material {
            ambient: [0.0; 3],
            diffuse,
            specular: [0.0; 3],
            base_color: [to8(diffuse[0]), to8(diffuse[1]), to8(diffuse[2]), 255],
        }
    }

    fn validate(&self) -> Result<()> {
        let in_range = |c: &[f32; 3]| c.iter().all(|v| (0.0..=1.0).contains(v));
        if in_range(&self.ambient) && in_range(&self.diffuse) && in_range(&self.specular) {
            Ok(())
        } else {
            Err(Error::InvalidMesh("material channel outside [0, 1]".into()))
        }
    }
}

/// Indexed triangle mesh with per-vertex normals and colors.
#[derive(Debug, Clone)]
pub struct Mesh {
    positions: Vec<Vec3>,
    normals: Vec<Vec3>,
    colors: Vec<[u8; 4]>,
    triangles: Vec<[u32; 3]>,
    material: Material,
    bounds: Aabb,
}

impl Mesh {
    /// Validates and assembles a mesh. Missing normals are filled with
    /// area-weighted face normals; missing colors default to the material's
    /// base color.
    pub fn new(
        positions: Vec<Vec3>,
        normals: Option<Vec<Vec3>>,
        colors: Option<Vec<[u8; 4]>>,
        triangles: Vec<[u32; 3]>,
        material: Material,
    ) -> Result<Self> {
        material.validate()?;
        if let Some(p) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidMesh(format!("vertex {p} is not finite")));
        }
        let n = positions.len();
        if let Some(t) = triangles.iter().position(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(Error::InvalidMesh(format!(
                "triangle {t} references a vertex outside 0..{n}"
            )));
        }
        let normals = match normals {
            Some(normals) => {
                if normals.len() != n {
                    return Err(Error::InvalidMesh(format!(
                        "{} normals for {n} vertices",
                        normals.len()
                    )));
                }
                if let Some(i) = normals
                    .iter()
                    .position(|v| !((v.length() - 1.0).abs() <= NORMAL_TOLERANCE))
                {
                    return Err(Error::InvalidMesh(format!("normal {i} is not unit length")));
                }
                normals
            }
            None => area_weighted_normals(&positions, &triangles),
        };
        let colors = match colors {
            Some(c) if c.len() == n => c,
            Some(c) => {
                return Err(Error::InvalidMesh(format!(
                    "{} colors for {n} vertices",
                    c.len()
                )))
            }
            None => vec![material.base_color; n],
        };
        let bounds = Aabb::from_points(positions.iter().copied());
        Ok(Mesh {
            positions,
            normals,
            colors,
            triangles,
            material,
            bounds,
        })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn colors(&self) -> &[[u8; 4]] {
        &self.colors
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn triangle_count(&self) -> u64 {
        self.triangles.len() as u64
    }

    /// Bounds of the vertices referenced or not; empty for a mesh without vertices.
    pub fn bounds(&self) -> Aabb {
        self.bounds
    }
}

fn area_weighted_normals(positions: &[Vec3], triangles: &[[u32; 3]]) -> Vec<Vec3> {
    let mut acc = vec![Vec3::ZERO; positions.len()];
    for t in triangles {
        let [a, b, c] = t.map(|i| positions[i as usize]);
        // cross product length is twice the area, so this is area weighted
        let n = (b - a).cross(c - a);
        for &i in t {
            acc[i as usize] += n;
        }
    }
    acc.into_iter()
        .map(|n| {
            let u = n.normalized();
            if u == Vec3::ZERO {
                Vec3::Z
            } else {
                u
            }
        })
        .collect()
}

/// A scene-graph node. Children are shared references, so the same subtree
/// may appear under several parents (instancing).
///
/// Nodes are immutable once built except for the surfel slot, which can be
/// filled exactly once by the preprocessing step.
#[derive(Debug)]
pub struct SceneNode {
    name: String,
    transform: Mat4,
    children: Vec<Arc<SceneNode>>,
    mesh: Option<Arc<Mesh>>,
    surfels: OnceLock<Arc<SurfelArray>>,
    local_bounds: Aabb,
    complexity: u64,
}

impl SceneNode {
    /// `transform` maps this node's local frame into its parent's frame.
    pub fn new(
        name: impl Into<String>,
        transform: Mat4,
        mesh: Option<Arc<Mesh>>,
        children: Vec<Arc<SceneNode>>,
    ) -> Self {
        let mut local_bounds = mesh.as_ref().map(|m| m.bounds()).unwrap_or(Aabb::EMPTY);
        let mut complexity = mesh.as_ref().map(|m| m.triangle_count()).unwrap_or(0);
        for c in &children {
            local_bounds = local_bounds.union(&c.bounds_in_parent());
            complexity += c.complexity;
        }
        SceneNode {
            name: name.into(),
            transform,
            children,
            mesh,
            surfels: OnceLock::new(),
            local_bounds,
            complexity,
        }
    }

    pub fn leaf(name: impl Into<String>, transform: Mat4, mesh: Arc<Mesh>) -> Self {
        SceneNode::new(name, transform, Some(mesh), Vec::new())
    }

    pub fn group(name: impl Into<String>, transform: Mat4, children: Vec<Arc<SceneNode>>) -> Self {
        SceneNode::new(name, transform, None, children)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn transform(&self) -> &Mat4 {
        &self.transform
    }

    pub fn children(&self) -> &[Arc<SceneNode>] {
        &self.children
    }

    pub fn mesh(&self) -> Option<&Arc<Mesh>> {
        self.mesh.as_ref()
    }

    pub fn surfels(&self) -> Option<&Arc<SurfelArray>> {
        self.surfels.get()
    }

    /// Attaches a surfel array. Returns `false` if one was already attached.
    pub fn attach_surfels(&self, surfels: Arc<SurfelArray>) -> bool {
        self.surfels.set(surfels).is_ok()
    }

    /// Cached bounds of the subtree in this node's local frame (before its own
    /// transform). Child boxes are propagated through their transforms by
    /// corners, so under rotations this is a superset of the exact bounds.
    pub fn local_bounds(&self) -> Aabb {
        self.local_bounds
    }

    /// Cached bounds expressed in the parent's frame.
    pub fn bounds_in_parent(&self) -> Aabb {
        self.local_bounds.transformed(&self.transform)
    }

    /// Triangle count of the subtree, counting shared subtrees once per occurrence.
    pub fn complexity(&self) -> u64 {
        self.complexity
    }

    /// Calls `f` for every mesh occurrence in the subtree with the matrix that
    /// maps mesh coordinates into the frame described by `frame` (which maps
    /// this node's local coordinates). Order: own mesh first, then children in order.
    pub fn visit_meshes<F: FnMut(&Arc<Mesh>, &Mat4)>(&self, frame: &Mat4, f: &mut F) {
        if let Some(m) = &self.mesh {
            f(m, frame);
        }
        for c in &self.children {
            let xf = *frame * c.transform;
            c.visit_meshes(&xf, f);
        }
    }

    /// Depth-first pre-order walk over every occurrence of every node.
    pub fn visit_nodes<F: FnMut(&Arc<SceneNode>, usize)>(self: &Arc<Self>, f: &mut F) {
        fn walk<F: FnMut(&Arc<SceneNode>, usize)>(n: &Arc<SceneNode>, depth: usize, f: &mut F) {
            f(n, depth);
            for c in &n.children {
                walk(c, depth + 1, f);
            }
        }
        walk(self, 0, f);
    }
}

/// Exact bounds of every transformed vertex in the subtree, where
/// `parent_transform` maps the parent's frame to world. Returns the empty
/// sentinel for subtrees without vertices.
pub fn world_bounds(node: &SceneNode, parent_transform: &Mat4) -> Aabb {
    let mut b = Aabb::EMPTY;
    node.visit_meshes(&(*parent_transform * node.transform), &mut |mesh, xf| {
        for &p in mesh.positions() {
            b.extend(xf.transform_point(p));
        }
    });
    b
}

/// Triangles in the subtree, counted once per instance path.
pub fn aggregate_complexity(node: &SceneNode) -> u64 {
    node.complexity()
}

/// Thresholds for preprocessing and for structuring unstructured input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    /// Nodes with strictly more triangles than this get a surfel array.
    pub complexity_threshold: u64,
    pub octree_leaf_capacity: usize,
    pub octree_looseness: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            complexity_threshold: 10_000,
            octree_leaf_capacity: 8,
            octree_looseness: 2.0,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.complexity_threshold == 0 {
            return Err(Error::InvalidParameter("complexity threshold must be > 0".into()));
        }
        if self.octree_leaf_capacity == 0 {
            return Err(Error::InvalidParameter("octree leaf capacity must be > 0".into()));
        }
        if !(self.octree_looseness >= 1.0) {
            return Err(Error::InvalidParameter("octree looseness must be >= 1".into()));
        }
        Ok(())
    }
}

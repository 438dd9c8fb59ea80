//! Loose octree for structuring flat object lists into a scene graph.
//!
//! A cell with center `c` and half size `h` accepts any object whose bounds fit
//! in `c ± h · looseness`. Objects descend into the child octant holding their
//! center for as long as they fit there; a cell is only split when it holds more
//! than the leaf capacity.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::math::{Aabb, Mat4, Vec3};
use crate::scene::{BuildConfig, Mesh, SceneNode};

/// Capacity is advisory at this depth.
pub const MAX_OCTREE_DEPTH: usize = 21;

#[derive(Debug, Clone)]
pub struct OctreeCell {
    pub center: Vec3,
    pub half: f64,
    pub depth: usize,
    /// Indices into the input list of objects that stay at this cell.
    pub objects: Vec<usize>,
    /// Child cell with its octant index (bit 0 = +x, bit 1 = +y, bit 2 = +z).
    pub children: Vec<(usize, OctreeCell)>,
}

impl OctreeCell {
    pub fn loose_bounds(&self, looseness: f64) -> Aabb {
        let h = Vec3::splat(self.half * looseness);
        Aabb::new(self.center - h, self.center + h)
    }

    pub fn child_center(&self, octant: usize) -> Vec3 {
        let q = self.half * 0.5;
        let s = |bit: usize| if octant & bit != 0 { q } else { -q };
        self.center + Vec3::new(s(1), s(2), s(4))
    }

    pub fn octant_of(&self, p: Vec3) -> usize {
        (p.x >= self.center.x) as usize | ((p.y >= self.center.y) as usize) << 1 | ((p.z >= self.center.z) as usize) << 2
    }

    pub fn max_depth(&self) -> usize {
        self.children.iter().map(|(_, c)| c.max_depth()).max().unwrap_or(self.depth)
    }

    /// Every cell in pre-order.
    pub fn cells(&self) -> Vec<&OctreeCell> {
        let mut out = vec![self];
        for (_, c) in &self.children {
            out.extend(c.cells());
        }
        out
    }
}

/// Builds the cell hierarchy for a list of object bounds.
pub fn build_octree_cells(bounds: &[Aabb], cfg: &BuildConfig) -> Result<OctreeCell> {
    cfg.validate()?;
    if bounds.is_empty() {
        return Err(Error::EmptyScene);
    }
    let global = bounds.iter().fold(Aabb::EMPTY, |a, b| a.union(b));
    if global.is_empty() {
        return Err(Error::EmptyBounds);
    }
    let all: Vec<usize> = (0..bounds.len()).collect();
    let half = global.extent().max_element() * 0.5;
    let mut root = OctreeCell {
        center: global.center(),
        half,
        depth: 0,
        objects: Vec::new(),
        children: Vec::new(),
    };
    if half <= 0.0 {
        root.objects = all;
        return Ok(root);
    }
    split(&mut root, all, bounds, cfg);
    Ok(root)
}

fn split(cell: &mut OctreeCell, objects: Vec<usize>, bounds: &[Aabb], cfg: &BuildConfig) {
    if objects.len() <= cfg.octree_leaf_capacity || cell.depth >= MAX_OCTREE_DEPTH {
        cell.objects = objects;
        return;
    }
    let mut buckets: [Vec<usize>; 8] = Default::default();
    let mut stay = Vec::new();
    for i in objects {
        let b = &bounds[i];
        let octant = cell.octant_of(b.center());
        let child = OctreeCell {
            center: cell.child_center(octant),
            half: cell.half * 0.5,
            depth: cell.depth + 1,
            objects: Vec::new(),
            children: Vec::new(),
        };
        if child.loose_bounds(cfg.octree_looseness).contains(b) {
            buckets[octant].push(i);
        } else {
            stay.push(i);
        }
    }
    cell.objects = stay;
    for (octant, members) in buckets.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let mut child = OctreeCell {
            center: cell.child_center(octant),
            half: cell.half * 0.5,
            depth: cell.depth + 1,
            objects: Vec::new(),
            children: Vec::new(),
        };
        split(&mut child, members, bounds, cfg);
        cell.children.push((octant, child));
    }
}

/// Organizes `(mesh, transform)` objects into a loose-octree scene graph.
///
/// Every distinct mesh becomes one shared prototype node, and each object is a
/// transform node referencing its prototype, so a surfel array built for the
/// prototype serves all of its instances. Object bounds are the mesh bounds
/// propagated through the transform by corners.
pub fn build_loose_octree(objects: &[(Arc<Mesh>, Mat4)], cfg: &BuildConfig) -> Result<Arc<SceneNode>> {
    if objects.is_empty() {
        return Err(Error::EmptyScene);
    }
    if objects.iter().any(|(_, t)| !t.is_affine() || t.inverse_affine().is_none()) {
        return Err(Error::SingularTransform);
    }
    let mut prototypes: HashMap<*const Mesh, Arc<SceneNode>> = HashMap::new();
    let mut nodes = Vec::with_capacity(objects.len());
    let mut bounds = Vec::with_capacity(objects.len());
    for (i, (mesh, xf)) in objects.iter().enumerate() {
        let next = prototypes.len();
        let proto = prototypes
            .entry(Arc::as_ptr(mesh))
            .or_insert_with(|| Arc::new(SceneNode::leaf(format!("mesh{next}"), Mat4::IDENTITY, mesh.clone())))
            .clone();
        let node = Arc::new(SceneNode::group(format!("obj{i}"), *xf, vec![proto]));
        bounds.push(node.bounds_in_parent());
        nodes.push(node);
    }
    let root = build_octree_cells(&bounds, cfg)?;
    Ok(Arc::new(cell_to_node(&root, &nodes, "cell")))
}

fn cell_to_node(cell: &OctreeCell, nodes: &[Arc<SceneNode>], name: &str) -> SceneNode {
    let mut children: Vec<Arc<SceneNode>> = cell.objects.iter().map(|&i| nodes[i].clone()).collect();
    for (octant, c) in &cell.children {
        children.push(Arc::new(cell_to_node(c, nodes, &format!("{name}.{octant}"))));
    }
    SceneNode::group(name, Mat4::IDENTITY, children)
}

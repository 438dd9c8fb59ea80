use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};

pub const LEAF_CAPACITY: usize = 16;
const MAX_DEPTH: u32 = 21;

#[derive(Debug, Clone)]
struct Node {
    center: Vec3,
    half: f64,
    depth: u32,
    /// Tight bounds of the points stored below this node; used for pruning.
    tight: Aabb,
    /// Index of the first of eight consecutive children.
    children: Option<u32>,
    items: Vec<u32>,
}

/// Incremental octree over inserted points with exact nearest-neighbor queries.
///
/// Cells split at [`LEAF_CAPACITY`] points. Pruning uses tight per-node bounds,
/// so points outside the initial region are still handled exactly.
#[derive(Debug, Clone)]
pub struct PointIndex {
    nodes: Vec<Node>,
    points: Vec<Vec3>,
}

impl PointIndex {
    pub fn new(region: &Aabb) -> Self {
        let (center, half) = if region.is_empty() {
            (Vec3::ZERO, 1.0)
        } else {
            (region.center(), (region.extent().max_element() * 0.5).max(f64::MIN_POSITIVE))
        };
        PointIndex {
            nodes: vec![Node {
                center,
                half,
                depth: 0,
                tight: Aabb::EMPTY,
                children: None,
                items: Vec::new(),
            }],
            points: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    #[inline]
    fn octant(center: Vec3, p: Vec3) -> usize {
        (p.x >= center.x) as usize | ((p.y >= center.y) as usize) << 1 | ((p.z >= center.z) as usize) << 2
    }

    pub fn insert(&mut self, p: Vec3) {
        let id = self.points.len() as u32;
        self.points.push(p);
        let mut n = 0usize;
        loop {
            self.nodes[n].tight.extend(p);
            match self.nodes[n].children {
                Some(first) => n = first as usize + Self::octant(self.nodes[n].center, p),
                None => break,
            }
        }
        self.nodes[n].items.push(id);
        if self.nodes[n].items.len() > LEAF_CAPACITY && self.nodes[n].depth < MAX_DEPTH {
            self.split(n);
        }
    }

    fn split(&mut self, n: usize) {
        let first = self.nodes.len() as u32;
        let (center, half, depth) = (self.nodes[n].center, self.nodes[n].half, self.nodes[n].depth);
        let q = half * 0.5;
        for o in 0..8 {
            let s = |bit: usize| if o & bit != 0 { q } else { -q };
            self.nodes.push(Node {
                center: center + Vec3::new(s(1), s(2), s(4)),
                half: q,
                depth: depth + 1,
                tight: Aabb::EMPTY,
                children: None,
                items: Vec::new(),
            });
        }
        let items = std::mem::take(&mut self.nodes[n].items);
        self.nodes[n].children = Some(first);
        for id in items {
            let p = self.points[id as usize];
            let c = first as usize + Self::octant(center, p);
            self.nodes[c].tight.extend(p);
            self.nodes[c].items.push(id);
        }
    }

    /// Exact squared distance from `q` to the nearest indexed point.
    pub fn nearest_distance_squared(&self, q: Vec3) -> Result<f64> {
        if self.points.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let mut best = f64::INFINITY;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.tight.distance_squared(q) >= best {
                continue;
            }
            match node.children {
                None => {
                    for &id in &node.items {
                        let d = self.points[id as usize].distance_squared(q);
                        if d < best {
                            best = d;
                        }
                    }
                }
                Some(first) => {
                    let mut order: [(f64, u32); 8] = [(0.0, 0); 8];
                    let mut k = 0;
                    for c in first..first + 8 {
                        let child = &self.nodes[c as usize];
                        if child.tight.is_empty() {
                            continue;
                        }
                        let d = child.tight.distance_squared(q);
                        if d < best {
                            order[k] = (d, c);
                            k += 1;
                        }
                    }
                    // push farthest first so the nearest child is searched next
                    order[..k].sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
                    stack.extend(order[..k].iter().map(|&(_, c)| c));
                }
            }
        }
        Ok(best)
    }

    /// Exact Euclidean distance from `q` to the nearest indexed point.
    pub fn nn_distance(&self, q: Vec3) -> Result<f64> {
        self.nearest_distance_squared(q).map(f64::sqrt)
    }
}

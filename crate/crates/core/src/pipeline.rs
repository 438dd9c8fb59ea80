//! Preprocessing over a whole scene graph.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::math::Mat4;
use crate::gen::{extract_initial_surfels, GenConfig};
use crate::sampler::{order_surfels, SamplerConfig};
use crate::scene::{BuildConfig, SceneNode};
use crate::surfel::SurfelArray;

/// Surfel content is keyed by what it is generated from: a childless node by
/// its mesh (its surfels live in the mesh frame, whatever its transform), a
/// mesh-less node with a single untransformed child by that child, any other
/// node by identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum ContentKey {
    Mesh(usize),
    Node(usize),
}

fn content_key(node: &Arc<SceneNode>) -> ContentKey {
    match (node.mesh(), node.children()) {
        (Some(m), []) => ContentKey::Mesh(Arc::as_ptr(m) as usize),
        (None, [only]) if *only.transform() == Mat4::IDENTITY => content_key(only),
        _ => ContentKey::Node(Arc::as_ptr(node) as usize),
    }
}

/// Generates the surfel array of one subtree.
pub fn build_node_surfels(node: &SceneNode, gen: &GenConfig, samp: &SamplerConfig) -> Result<SurfelArray> {
    let initial = extract_initial_surfels(node, gen)?;
    order_surfels(&initial, samp)
}

/// Attaches a surfel array to every node whose complexity exceeds the
/// threshold, walking top-down. Shared subtrees and leaves sharing a mesh get
/// one array. Nodes that already carry surfels are left alone.
///
/// Returns the number of arrays generated.
pub fn build_surfels_for_scene(
    root: &Arc<SceneNode>,
    build: &BuildConfig,
    gen: &GenConfig,
    samp: &SamplerConfig,
) -> Result<usize> {
    build.validate()?;
    gen.validate()?;
    samp.validate()?;
    let mut done: HashMap<ContentKey, Arc<SurfelArray>> = HashMap::new();
    let mut visited: HashMap<usize, ()> = HashMap::new();
    let mut created = 0;
    let mut stack = vec![root.clone()];
    while let Some(node) = stack.pop() {
        if visited.insert(Arc::as_ptr(&node) as usize, ()).is_some() {
            continue;
        }
        if node.complexity() > build.complexity_threshold && node.surfels().is_none() {
            let key = content_key(&node);
            let arr = match done.get(&key) {
                Some(a) => a.clone(),
                None => {
                    let a = Arc::new(build_node_surfels(&node, gen, samp).map_err(|e| e.at_node(node.name()))?);
                    created += 1;
                    done.insert(key, a.clone());
                    a
                }
            };
            node.attach_surfels(arr);
        }
        // reversed so children are processed in declaration order
        stack.extend(node.children().iter().rev().cloned());
    }
    Ok(created)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::scene::{shapes, Mesh};

    fn fast() -> (GenConfig, SamplerConfig) {
        (GenConfig { resolution: 32 }, SamplerConfig { max_surfels: 64, candidate_count: 8, seed: 1 })
    }

    fn blob_with(tris_target: usize) -> Arc<Mesh> {
        // 2 · around · (rings − 1) triangles
        let rings = 51;
        Arc::new(shapes::blob(tris_target / (2 * (rings - 1)), rings))
    }

    #[test]
    fn small_node_gets_nothing() {
        let (g, s) = fast();
        let m = Arc::new(shapes::blob(10, 26)); // 500 triangles
        assert_eq!(m.triangle_count(), 500);
        let root = Arc::new(SceneNode::leaf("a", Mat4::IDENTITY, m));
        assert_eq!(build_surfels_for_scene(&root, &BuildConfig::default(), &g, &s).unwrap(), 0);
        assert!(root.surfels().is_none());
    }

    #[test]
    fn complex_node_gets_one_array() {
        let (g, s) = fast();
        let m = blob_with(20_000);
        assert_eq!(m.triangle_count(), 20_000);
        let root = Arc::new(SceneNode::leaf("a", Mat4::IDENTITY, m));
        assert_eq!(build_surfels_for_scene(&root, &BuildConfig::default(), &g, &s).unwrap(), 1);
        assert!(root.surfels().unwrap().len() <= 64);
    }

    #[test]
    fn shared_prototype_is_built_once() {
        let (g, s) = fast();
        let proto = Arc::new(SceneNode::leaf("proto", Mat4::IDENTITY, blob_with(20_000)));
        let a = Arc::new(SceneNode::group("a", Mat4::translation(Vec3::X * 5.0), vec![proto.clone()]));
        let b = Arc::new(SceneNode::group("b", Mat4::translation(-Vec3::X * 5.0), vec![proto.clone()]));
        let root = Arc::new(SceneNode::group("root", Mat4::IDENTITY, vec![a.clone(), b.clone()]));
        // one array for the prototype, reused by both instance paths, plus the root's
        let created = build_surfels_for_scene(&root, &BuildConfig::default(), &g, &s).unwrap();
        assert_eq!(created, 2);
        assert!(Arc::ptr_eq(a.surfels().unwrap(), proto.surfels().unwrap()));
        assert!(Arc::ptr_eq(b.surfels().unwrap(), proto.surfels().unwrap()));
        assert!(!Arc::ptr_eq(root.surfels().unwrap(), proto.surfels().unwrap()));

        // two leaves on one mesh share one array
        let m = blob_with(20_000);
        let l1 = Arc::new(SceneNode::leaf("l1", Mat4::translation(Vec3::X * 3.0), m.clone()));
        let l2 = Arc::new(SceneNode::leaf("l2", Mat4::IDENTITY, m));
        let root = Arc::new(SceneNode::group("r", Mat4::IDENTITY, vec![l1.clone(), l2.clone()]));
        let cfg = BuildConfig { complexity_threshold: 15_000, ..Default::default() };
        assert_eq!(build_surfels_for_scene(&root, &cfg, &g, &s).unwrap(), 2);
        assert!(Arc::ptr_eq(l1.surfels().unwrap(), l2.surfels().unwrap()));
    }

    #[test]
    fn errors_name_the_node() {
        let (_, s) = fast();
        let root = Arc::new(SceneNode::leaf("flat", Mat4::IDENTITY, blob_with(20_000)));
        let err = build_surfels_for_scene(&root, &BuildConfig::default(), &GenConfig { resolution: 8 }, &s).unwrap_err();
        assert!(err.to_string().contains("resolution"), "{err}");
        let degenerate = Mesh::new(vec![Vec3::ZERO; 3], None, None, vec![[0, 1, 2]; 20_001], Default::default()).unwrap();
        let root = Arc::new(SceneNode::leaf("flat", Mat4::IDENTITY, Arc::new(degenerate)));
        let err = build_surfels_for_scene(&root, &BuildConfig::default(), &fast().0, &s).unwrap_err();
        assert!(err.to_string().contains("`flat`"), "{err}");
    }
}

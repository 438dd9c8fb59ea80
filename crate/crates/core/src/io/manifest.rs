//! JSON scene manifests.
//!
//! ```json
//! { "nodes": [
//!     { "id": "root", "parent": null, "transform": [1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1] },
//!     { "id": "bunny", "parent": "root", "transform": [...], "mesh": "bunny.obj", "surfels": "bunny.bsrf" }
//! ] }
//! ```
//!
//! Transforms are 16 column-major values (identity when omitted). Relative mesh
//! and surfel paths resolve against the manifest's directory. Nodes naming the
//! same mesh or surfel file share one loaded copy.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_obj, load_surfels};
use crate::math::Mat4;
use crate::scene::{Mesh, SceneNode};
use crate::surfel::SurfelArray;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub nodes: Vec<ManifestNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestNode {
    pub id: String,
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default = "identity")]
    pub transform: [f64; 16],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surfels: Option<String>,
}

fn identity() -> [f64; 16] {
    Mat4::IDENTITY.m
}

#[derive(Debug)]
pub struct LoadedScene {
    pub root: Arc<SceneNode>,
    pub manifest: Manifest,
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Manifest::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Builds the scene graph described by `manifest`. Node names are manifest ids.
pub fn scene_from_manifest(manifest: &Manifest, base_dir: &Path) -> Result<Arc<SceneNode>> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, n) in manifest.nodes.iter().enumerate() {
        if index.insert(n.id.as_str(), i).is_some() {
            return Err(Error::Manifest(format!("duplicate node id `{}`", n.id)));
        }
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); manifest.nodes.len()];
    let mut roots = Vec::new();
    for (i, n) in manifest.nodes.iter().enumerate() {
        match &n.parent {
            None => roots.push(i),
            Some(p) => {
                let &pi = index
                    .get(p.as_str())
                    .ok_or_else(|| Error::Manifest(format!("node `{}` has unknown parent `{p}`", n.id)))?;
                children[pi].push(i);
            }
        }
        let m = Mat4::from_cols_array(n.transform);
        if !n.transform.iter().all(|v| v.is_finite()) || !m.is_affine() || m.inverse_affine().is_none() {
            return Err(Error::Manifest(format!("node `{}` has a non-invertible or non-affine transform", n.id)));
        }
    }
    let root = match roots.as_slice() {
        [r] => *r,
        [] => return Err(Error::EmptyScene),
        _ => return Err(Error::Manifest(format!("{} root nodes; expected exactly one", roots.len()))),
    };

    let mut meshes: HashMap<PathBuf, Arc<Mesh>> = HashMap::new();
    let mut arrays: HashMap<PathBuf, Arc<SurfelArray>> = HashMap::new();
    let mut visited = 0usize;

    fn build(
        i: usize,
        manifest: &Manifest,
        children: &[Vec<usize>],
        base: &Path,
        meshes: &mut HashMap<PathBuf, Arc<Mesh>>,
        arrays: &mut HashMap<PathBuf, Arc<SurfelArray>>,
        visited: &mut usize,
    ) -> Result<Arc<SceneNode>> {
        *visited += 1;
        let entry = &manifest.nodes[i];
        let mesh = match &entry.mesh {
            Some(p) => {
                let path = resolve(base, p);
                Some(match meshes.get(&path) {
                    Some(m) => m.clone(),
                    None => {
                        let m = Arc::new(load_obj(&path).map_err(|e| e.at_node(&entry.id))?);
                        meshes.insert(path, m.clone());
                        m
                    }
                })
            }
            None => None,
        };
        let kids = children[i]
            .iter()
            .map(|&c| build(c, manifest, children, base, meshes, arrays, visited))
            .collect::<Result<Vec<_>>>()?;
        let node = SceneNode::new(entry.id.clone(), Mat4::from_cols_array(entry.transform), mesh, kids);
        if let Some(p) = &entry.surfels {
            let path = resolve(base, p);
            let arr = match arrays.get(&path) {
                Some(a) => a.clone(),
                None => {
                    let a = Arc::new(load_surfels(&path, None).map_err(|e| e.at_node(&entry.id))?);
                    arrays.insert(path, a.clone());
                    a
                }
            };
            node.attach_surfels(arr);
        }
        Ok(Arc::new(node))
    }

    let scene = build(root, manifest, &children, base_dir, &mut meshes, &mut arrays, &mut visited)?;
    if visited != manifest.nodes.len() {
        return Err(Error::Manifest("parent links contain a cycle".into()));
    }
    Ok(scene)
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<LoadedScene> {
    let path = path.as_ref();
    let manifest = Manifest::load(path)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let root = scene_from_manifest(&manifest, &base_dir)?;
    Ok(LoadedScene { root, manifest, base_dir })
}

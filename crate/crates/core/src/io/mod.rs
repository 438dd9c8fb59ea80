//! Persistence: surfel files, OBJ meshes, PNG frames and scene manifests.

mod manifest;
mod obj;
mod png;
mod surfel_file;

pub use manifest::{load_scene, scene_from_manifest, LoadedScene, Manifest, ManifestNode};
pub use obj::{load_obj, parse_obj, save_obj, write_obj};
pub use png::{decode_png, encode_png, load_image, save_image};
pub use surfel_file::{
    load_surfels, read_surfels, save_surfels, write_surfels, SurfelFileHeader, HEADER_LEN, MAGIC, RECORD_LEN,
    VERSION,
};

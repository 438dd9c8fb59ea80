//! Progressive blue-noise surfels.
//!
//! Complex nodes of a scene graph are replaced at a distance by a prefix of a
//! precomputed, carefully ordered array of surfels (oriented point samples).
//! The crate covers the whole path:
//!
//! - [`scene`]: scene graph with instancing and a loose octree for flat input
//! - [`gen`]: initial surfels from eight orthographic corner views
//! - [`sampler`]: dart-throwing selection and ordering of those surfels
//! - [`pipeline`]: preprocessing of every sufficiently complex node
//! - [`lod`]: per-frame choice between geometry and surfel prefixes
//! - [`render`]: deterministic software renderer for both
//! - [`analysis`]: distance curves, image metrics and the scaling bench
//! - [`io`]: surfel files, OBJ, PNG and scene manifests

pub mod analysis;
pub mod error;
pub mod frame;
pub mod gen;
pub mod io;
pub mod lod;
pub mod math;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod rng;
pub mod sampler;
pub mod scene;
pub mod surfel;

pub use error::{Error, Result};
pub use frame::{Image, BACKGROUND};
pub use math::{Aabb, Mat4, Vec3};
pub use scene::{BuildConfig, Material, Mesh, SceneNode};
pub use surfel::{InitialSurfelSet, Surfel, SurfelArray};

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scene is empty")]
    EmptyScene,

    #[error("bounding box is empty")]
    EmptyBounds,

    #[error("transform is not an invertible affine matrix")]
    SingularTransform,

    #[error("subtree has no triangles")]
    NoTriangles,

    #[error("no occupied pixels in any view")]
    NoOccupiedPixels,

    #[error("surfel set is empty")]
    EmptySurfelSet,

    #[error("point index is empty")]
    EmptyIndex,

    #[error("need at least {needed} surfels, got {got}")]
    TooFewSurfels { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("image dimensions {width}x{height} are not allowed")]
    ImageSize { width: u32, height: u32 },

    #[error("image dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((u32, u32), (u32, u32)),

    #[error("surfel file format: {0}")]
    Format(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("node `{node}`: {source}")]
    Node {
        node: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("png: {0}")]
    Image(#[from] image::ImageError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_node(self, node: &str) -> Self {
        Error::Node {
            node: node.to_string(),
            source: Box::new(self),
        }
    }
}

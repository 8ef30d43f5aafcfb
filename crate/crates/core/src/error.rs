use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: incompatible shapes {shapes:?}")]
    ShapeMismatch { op: &'static str, shapes: Vec<Vec<usize>> },

    #[error("{op}: {reason}")]
    InvalidArgument { op: &'static str, reason: String },

    #[error("backward requires a scalar root, got shape {0:?}")]
    NonScalarRoot(Vec<usize>),

    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },

    #[error("value {value} out of range for {field} at frame {frame}, joint {joint}")]
    OutOfRange { field: &'static str, value: f64, frame: usize, joint: usize },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("model input has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite loss {value} at {stage} {index}")]
    NonFinite { stage: &'static str, index: usize, value: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("architecture mismatch: expected {expected}, checkpoint holds {found}")]
    ArchitectureMismatch { expected: String, found: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, shapes: &[&[usize]]) -> Self {
        Error::ShapeMismatch { op, shapes: shapes.iter().map(|s| s.to_vec()).collect() }
    }

    pub(crate) fn invalid(op: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { op, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

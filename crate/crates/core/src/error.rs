use std::path::PathBuf;

use crate::memory::Class;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum HdcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cosine similarity is undefined for an all-zero vector")]
    UndefinedSimilarity,

    #[error("associative memory is untrained: the {0} prototype is empty")]
    UntrainedMemory(Class),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HdcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        HdcError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HdcError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HdcError>;

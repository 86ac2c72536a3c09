//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file contents (corpus records, embedding lines, model blobs).
    #[error("{0}")]
    Format(String),

    /// A precondition on operation inputs does not hold.
    #[error("{0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("training data contains a single class; need at least one example of each")]
    SingleClassTrainingData,

    #[error("unknown configuration key `{0}`")]
    UnknownConfigKey(String),

    #[error("invalid value for configuration key `{key}`: {reason}")]
    InvalidConfigValue { key: String, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the sphere cover toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}, column '{column}': '{value}' is not a number")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("model has no spheres and cannot classify")]
    UnusableModel,
    #[error("class '{0}' has a single instance, no nearest hit exists")]
    SingletonClass(String),
    #[error("no Nemenyi constant for k = {0}; the embedded table covers k = 2..=10, extend it to go further")]
    TableRange(usize),
    #[error("malformed model document: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unseen value {value:?} in column {column:?}")]
    UnseenValue { column: String, value: String },

    #[error("invalid {name}: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("objective became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            msg: msg.into(),
        }
    }
}

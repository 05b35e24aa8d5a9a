//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violates a precondition (bad index, infeasible range,
    /// invalid enum value, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Array shapes do not agree with each other or with the geometry.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Structurally valid input on which the operation has no defined
    /// result (all-zero image, fully dead detector row, constant ground
    /// truth, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Config or data-file syntax error, with the offending line.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// Malformed binary/array file contents.
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn mismatch(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }
}

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Validation-style errors (`DimensionMismatch`, `InvalidArgument`,
/// `InvalidSystem`, ...) indicate bad input; `Internal` indicates a broken
/// numerical invariant and is never the caller's fault.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not hermitian: {0}")]
    NotHermitian(String),

    #[error("invalid reconstruction system: {0}")]
    InvalidSystem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not an orthogonal projection: {0}")]
    NotProjection(String),

    #[error("combinatorial size guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal numerical inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

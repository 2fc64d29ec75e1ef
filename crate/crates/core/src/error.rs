//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the workbench library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation was applied to a value in the wrong state
    /// (e.g. evaluating a circuit that still has free parameters).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A gate kind outside the supported set was encountered.
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    /// The problem size exceeds what the dense solvers accept.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// Array or register dimensions do not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numeric computation produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A text artifact could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

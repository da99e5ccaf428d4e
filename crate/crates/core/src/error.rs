//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by claimgate operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An input is outside the mathematical domain of an operation
    /// (e.g. a non-positive argument to `ln_gamma`).
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The inputs are degenerate in a way that makes the result undefined
    /// (e.g. Pearson correlation of a constant vector).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An internal invariant was violated. This signals a bug in the
    /// caller's pipeline (e.g. an unclamped congruence reaching the
    /// posterior), not bad user data.
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::InternalInvariant(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::gaussian::ValidationReport;

/// Errors raised by state, channel and oracle computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite entry in {what} at index {idx}")]
    NonFinite { what: &'static str, idx: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("invalid state: {0}")]
    InvalidState(ValidationReport),

    #[error("invalid channel: {0}")]
    InvalidChannel(ValidationReport),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("mode mismatch: {0} vs {1}")]
    ModeMismatch(usize, usize),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("truncation error: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

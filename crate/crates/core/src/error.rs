//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error enum.
///
/// The split matters to callers: [`Error::Domain`] and [`Error::Overflow`]
/// mean the requested computation is not defined or not representable for the
/// given parameters, while the input/parse variants mean the data fed in was
/// malformed or insufficient.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Result not representable in f64 (or an intermediate would overflow).
    #[error("overflow: {0}")]
    Overflow(String),

    /// Structurally invalid input data (bad header, non-monotone timestamps, …).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Too little data for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Parse failure at a specific line of a text input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for a domain error with formatted context.
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Shorthand for an overflow error with formatted context.
    pub(crate) fn overflow(msg: impl Into<String>) -> Self {
        Error::Overflow(msg.into())
    }

    /// Shorthand for an invalid-input error with formatted context.
    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Shorthand for an insufficient-data error with formatted context.
    pub(crate) fn insufficient_data(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }
}

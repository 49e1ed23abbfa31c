//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by validation, computation, and input parsing.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or record violates its domain contract.
    #[error("{0}")]
    Domain(String),

    /// The data admit no meaningful statistic (e.g. pooled proportion 0 or 1).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A referenced institution id does not exist in the dataset.
    #[error("unknown institution id `{0}`")]
    UnknownId(String),

    /// Malformed input, with the 1-based line number of the offending row.
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn parse(line: u64, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

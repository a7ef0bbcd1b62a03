//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input with the 1-based line it came from.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structural or configuration invariant does not hold.
    #[error("{0}")]
    Invalid(String),

    /// Numerical failure: underflow, non-finite objective, broken monotonicity.
    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Error::Numerical(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

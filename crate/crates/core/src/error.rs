//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// API misuse: wrong option kind, mismatched lengths, region violations.
    #[error("usage error: {0}")]
    Usage(String),
    /// Bad run configuration (files, shapes, missing checkpoints).
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite value produced by a numerical routine.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Failure inside a training run (NaN gradients, diverged loss).
    #[error("training error: {0}")]
    Training(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn training(msg: impl Into<String>) -> Self {
        Error::Training(msg.into())
    }
}

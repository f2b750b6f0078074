use thiserror::Error;

/// Errors raised by the sampling library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A hyperparameter or shape is outside its valid domain.
    #[error("configuration error: {0}")]
    Config(String),

    /// A gradient or parameter became NaN/Inf during a chain.
    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite {
        what: &'static str,
        iteration: u64,
        theta: Vec<f64>,
    },

    /// A statistic was requested from an empty trace.
    #[error("empty trace")]
    EmptyTrace,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

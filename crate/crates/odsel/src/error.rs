use thiserror::Error;

/// Errors shared across the library and the command-line layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix argument has the wrong length/shape.
    #[error("{context}: expected length {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// NaN/divergence detected inside an iterative solver, or a subproblem
    /// failed to meet its termination condition within its iteration cap.
    #[error("numerical failure at iteration {iteration}: {reason}")]
    NumericalFailure { iteration: usize, reason: String },

    /// A data file could not be parsed into the expected shape.
    #[error("{path}: {message}")]
    FileFormat { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            actual,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

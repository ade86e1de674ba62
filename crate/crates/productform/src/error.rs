use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The graph is not strongly connected; `from` cannot reach `to`.
    #[error("graph is not strongly connected: no path from {from} to {to}")]
    NotStronglyConnected { from: String, to: String },
    /// An exhaustive or dense computation would exceed its size bound.
    #[error("resource limit exceeded: {what} is {actual}, bound is {limit}")]
    ResourceLimit {
        what: String,
        limit: usize,
        actual: usize,
    },
    /// A numeric result failed its residual check.
    #[error("numeric failure: {what} residual {residual:e} exceeds {bound:e}")]
    NumericFailure {
        what: String,
        residual: f64,
        bound: f64,
    },
    /// An internal invariant was broken.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

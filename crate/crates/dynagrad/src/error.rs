use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an API contract (dimension mismatch, bad argument).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Arithmetic produced or encountered a state with no defined result.
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// A run or environment configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested regret bound does not apply to the given inputs.
    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    /// A run aborted mid-stream; carries the offending round index.
    #[error("numerical abort at round {round}: {message}")]
    Numerical { round: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn inapplicable(msg: impl Into<String>) -> Self {
        Error::BoundInapplicable(msg.into())
    }
}

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A value lies outside the domain of the variable or function it is given to.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A linear-algebra step failed (typically a Cholesky factorization).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Every multistart of a hyperparameter fit failed.
    #[error("fit error: {0}")]
    Fit(String),
    /// An inconsistent configuration (folds, budgets, embeddings...).
    #[error("configuration error: {0}")]
    Config(String),
    /// The requested feature is outside the supported scope.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A derivative was requested at a point where only a one-sided limit exists.
    #[error("one-sided limit: {0}")]
    OneSidedLimit(String),
    /// Serialization round-trip failure.
    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

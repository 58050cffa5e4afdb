use thiserror::Error;

/// Error type shared by all library modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution parameter lies outside its domain.
    #[error("parameter out of domain: {0}")]
    ParamDomain(String),

    /// A linear-algebra operation failed (typically a Cholesky factorization
    /// of a matrix that is not positive definite).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Maximum-likelihood fitting failed (degenerate data or no convergence).
    #[error("distribution fit failed: {0}")]
    FitFailed(String),

    /// Caller-supplied data violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation was called in a state its contract forbids.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A file could not be parsed; carries file and line for diagnostics.
    #[error("parse error in {file}, line {line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

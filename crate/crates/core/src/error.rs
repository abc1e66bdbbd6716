use thiserror::Error;

/// Errors produced by the simulation, fitting and reporting layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request exceeded a resource guard (dense size, qubit count).
    #[error("refused: {0}")]
    Refused(String),

    /// A computed quantity failed an internal consistency check.
    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    /// A dense factorization did not converge.
    #[error("linear algebra failure: {0}")]
    LinAlg(String),

    /// A file or string could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

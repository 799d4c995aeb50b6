use thiserror::Error;

/// Errors produced by construction, decoding and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("termination system is inconsistent: {unsatisfied} tail equations cannot be met")]
    TerminationSingular { unsatisfied: usize },

    #[error("alist parse error at line {line}: {msg}")]
    Alist { line: usize, msg: String },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("bracket endpoints agree: both {0}")]
    Bracket(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParams(msg.into()))
}

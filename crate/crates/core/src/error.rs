use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate a precondition (unknown factor, bad permutation, invalid table).
    #[error("domain error: {0}")]
    Domain(String),

    /// The outcome function produced a non-finite value.
    #[error("outcome function returned {value} at corner {corner}")]
    NonFinite { corner: String, value: f64 },

    /// An error raised by the outcome function while evaluating one corner.
    #[error("evaluation failed at corner {corner}: {source}")]
    AtCorner {
        corner: String,
        #[source]
        source: Box<Error>,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("IPF did not converge within {iterations} iterations (max relative marginal deviation {deviation:e})")]
    Convergence { iterations: usize, deviation: f64 },

    /// Malformed input file (missing columns, bad header).
    #[error("format error: {0}")]
    Format(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("unmapped education code {0:?}")]
    UnmappedCode(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Innermost error, skipping corner wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtCorner { source, .. } => source.root(),
            other => other,
        }
    }
}

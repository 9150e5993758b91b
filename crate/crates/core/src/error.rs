use thiserror::Error;

use crate::chem::SmilesError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments violate an operation's preconditions.
    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Smiles(#[from] SmilesError),

    /// Cholesky factorization failed even after jitter escalation.
    #[error("{context}: factorization failed (last jitter tried {jitter:e})")]
    Numerical { context: String, jitter: f64 },

    /// An uncached oracle evaluation was requested with no budget left.
    #[error("oracle budget of {budget} evaluations exhausted")]
    BudgetExhausted { budget: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

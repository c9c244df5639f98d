use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient samples: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate regressor: all regressor values are identical")]
    DegenerateRegressor,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid window: alpha={alpha} must be >= 0 and < beta={beta}")]
    InvalidWindow { alpha: f64, beta: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("oracle size exceeded: n={n} > {max}")]
    OracleSizeExceeded { n: usize, max: usize },

    #[error("stability subsample {index} failed: {source}")]
    StabilityFailure {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("bootstrap replicate {index} failed: {source}")]
    BootstrapFailure {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("pair {0} has no usable rows")]
    EmptyPair(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

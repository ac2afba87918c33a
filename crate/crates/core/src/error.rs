use thiserror::Error;

/// Errors produced by mesh construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    /// A numerical procedure broke down. `estimate` carries the best value
    /// reached before the failure when one exists (e.g. power iteration).
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        estimate: Option<f64>,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure {
            message: msg.into(),
            estimate: None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

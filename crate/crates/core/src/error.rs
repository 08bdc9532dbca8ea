use std::path::PathBuf;

use num_complex::Complex64;

/// Errors produced by the approximation, estimation and benchmark layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {reason}")]
    DegenerateInput {
        reason: String,
        /// Generator at which the degeneracy was detected, if any.
        z: Option<Complex64>,
    },

    #[error("reciprocal of zero: winning grid point on the flipped problem is z = 0")]
    ReciprocalOfZero,

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The null ray with invariant `T = x + t <= 0` never enters the right wedge.
    #[error("beyond Rindler horizon: pulse with T = {t} is never received")]
    Horizon { t: f64 },

    #[error("numerical non-convergence in {context}: error estimate {estimate:e}")]
    NonConvergence { context: String, estimate: f64 },

    #[error("unphysical result: {0}")]
    Unphysical(String),

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } => 2,
            Error::NonConvergence { .. } | Error::Unphysical(_) | Error::Horizon { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}

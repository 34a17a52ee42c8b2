use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension d={0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: `{name}` = {value} is outside the domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("net infeasible at d={d}: {reason}")]
    NetInfeasible { d: usize, reason: String },

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from user input (bad config, parameters out of
    /// range) rather than from the runtime environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_)
                | Error::InvalidCodebook(_)
                | Error::InvalidParameter { .. }
                | Error::Domain { .. }
                | Error::NetInfeasible { .. }
                | Error::InvalidMatching(_)
                | Error::Config { .. }
                | Error::Json(_)
        )
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong between reading a config and writing a CSV.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("block fit: {0}")]
    BlockFit(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV {path} at line {line}: {reason}")]
    MalformedCsv {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Geometry(_) | Error::Input { .. } => 2,
            Error::Domain(_) | Error::Numerical(_) | Error::BlockFit(_) => 3,
            Error::Output { .. } => 4,
            Error::MalformedCsv { .. } => 5,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses of the `lqr-iss` binary.
pub mod exit {
    pub const OK: i32 = 0;
    /// A verification command found violated bounds or failed checks.
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const LEFT_ADMISSIBLE_SET: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const OUTPUT: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] lqr_iss_core::Error),
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(lqr_iss_core::Error::InvalidConfig(_) | lqr_iss_core::Error::InvalidWBar(_)) => exit::CONFIG,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Write { .. } => exit::OUTPUT,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub(crate) fn write(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Write {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

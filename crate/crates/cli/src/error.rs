use std::path::PathBuf;

use lrp_core::LrpError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("refused: {0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<LrpError> for CliError {
    fn from(e: LrpError) -> Self {
        match e {
            LrpError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

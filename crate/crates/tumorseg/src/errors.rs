use std::process::ExitCode;

use thiserror::Error;

/// Top-level failure classes, each mapped to a stable process exit code so
/// scripts can branch on what went wrong: 1 usage, 2 data, 3 numeric.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Data(_) => ExitCode::from(2),
            CliError::Numeric(_) => ExitCode::from(3),
        }
    }
}

impl From<volcore::VolError> for CliError {
    fn from(e: volcore::VolError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ctxwin::CtxError> for CliError {
    fn from(e: ctxwin::CtxError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<segmetrics::MetricError> for CliError {
    fn from(e: segmetrics::MetricError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<autonet::TensorError> for CliError {
    fn from(e: autonet::TensorError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<segarch::ArchError> for CliError {
    fn from(e: segarch::ArchError) -> Self {
        match e {
            segarch::ArchError::ConfigInvalid(msg) => CliError::Usage(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

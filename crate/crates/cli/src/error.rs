use std::process::ExitCode;

use spinlab::error::{AnalysisError, ExperimentError, IoError, SpinError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, unreadable input or invalid arguments.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Nyquist(String),
    /// The fit ran but did not converge; the partial result is already written.
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Failure(_) => 1,
            Self::Usage(_) => 2,
            Self::Nyquist(_) => 3,
            Self::NotConverged(_) => 4,
        })
    }

    pub fn usage(msg: impl std::fmt::Display) -> Self {
        Self::Usage(msg.to_string())
    }

    /// Errors while reading user input are usage errors.
    pub fn input(what: &str, err: IoError) -> Self {
        Self::Usage(format!("{what}: {err}"))
    }

    /// Errors while writing artifacts.
    pub fn output(what: &str, err: IoError) -> Self {
        Self::Failure(format!("{what}: {err}"))
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Nyquist { .. } => Self::Nyquist(e.to_string()),
            ExperimentError::InvalidSweep(_)
            | ExperimentError::InvalidArgument(_)
            | ExperimentError::Spin(_)
            | ExperimentError::Signal(_) => Self::Usage(e.to_string()),
            _ => Self::Failure(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Singular => Self::Failure(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> Self {
        Self::Usage(format!("invalid parameters: {e}"))
    }
}

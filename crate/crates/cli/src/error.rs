use compcap_core::counting::CountError;
use compcap_core::distribution::DistributionError;
use compcap_core::{MemoryError, ModelError, ParseError, SolveError, TraceError};
use thiserror::Error;

/// Errors surfaced by the CLI, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid input (exit 2).
    #[error("{0}")]
    Input(String),
    /// Missing, undeclared or malformed parameter values (exit 3).
    #[error("{0}")]
    Parameter(String),
    /// Solver failure (exit 1).
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Parameter(_) => 3,
            CliError::Internal(_) => 1,
        }
    }

    pub fn input(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{context}: {err}"))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        if e.is_binding_error() {
            CliError::Parameter(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::InvalidTolerance(_) => CliError::Input(e.to_string()),
            SolveError::NoConvergence { .. } => CliError::Internal(e.to_string()),
        }
    }
}

impl From<MemoryError> for CliError {
    fn from(e: MemoryError) -> Self {
        match e {
            MemoryError::Model(m) => m.into(),
            MemoryError::Solve(s) => s.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Solve(s) => s.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<CountError> for CliError {
    fn from(e: CountError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DistributionError> for CliError {
    fn from(e: DistributionError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

use std::fmt;
use std::path::Path;

use lexgrowth::{FitError, GrowthError, IngestError, ModelError};

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag values (exit 1).
    Usage(String),
    /// Malformed or insufficient data (exit 2).
    Data(String),
    /// Reading or writing failed (exit 3).
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(err: IngestError) -> Self {
        match err {
            IngestError::Io { .. } => CliError::Io(err.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<GrowthError> for CliError {
    fn from(err: GrowthError) -> Self {
        match err {
            GrowthError::Fit(fit) => fit.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(err: FitError) -> Self {
        match err {
            FitError::NoInteriorMaximum { .. } => {
                CliError::Data(format!("NoInteriorMaximum: {err}"))
            }
            FitError::NotConcave { .. } => CliError::Data(format!("NotConcave: {err}")),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        match err {
            // domain errors come from flag values: lengths, shares, grids, trials
            ModelError::Domain(msg) => CliError::Usage(format!("DomainError: {msg}")),
            other => CliError::Data(other.to_string()),
        }
    }
}

//! Command errors and their process exit codes.

use mxvac_core::Error as CoreError;

/// Exit codes: 0 success, 1 comparison failed, 2 invalid scenario,
/// 3 unstable model or aborted simulation, 4 missing artifacts,
/// 5 numerical failure or unsupported request, 6 I/O failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("comparison failed: {0}")]
    CompareFailed(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::CompareFailed(_) => 1,
            Self::Scenario(_) => 2,
            Self::Core(CoreError::InvalidParameter(_)) => 2,
            Self::Core(CoreError::Unstable { .. } | CoreError::SimulationAborted(_)) => 3,
            Self::MissingArtifact(_) => 4,
            Self::Core(_) => 5,
            Self::Io(_) => 6,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.to_string())
    }
}

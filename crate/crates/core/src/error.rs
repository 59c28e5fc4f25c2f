use alloc::string::String;

/// Errors raised by model construction, analytics, the oracle and the simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unstable working mode: rho = {rho} (must be < 1)")]
    Unstable { rho: f64 },

    #[error("numerical diagnostic failed: {0}")]
    Diagnostic(String),

    #[error("series did not converge within {terms} terms: {what}")]
    Divergent { what: String, terms: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("simulation aborted: {0}")]
    SimulationAborted(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}

macro_rules! diagnostic {
    ($($arg:tt)*) => {
        $crate::Error::Diagnostic(alloc::format!($($arg)*))
    };
}

pub(crate) use diagnostic;
pub(crate) use invalid;

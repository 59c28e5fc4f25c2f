//! File formats and the command-line front end for `mxvac-core`.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

pub use error::CliError;
pub use output::Format;
pub use scenario::Scenario;

//! Library side of the `loanmix` command: scenario files and the
//! subcommand implementations.

pub mod commands;
pub mod error;
pub mod scenario;

pub use error::CliError;
pub use scenario::{Scenario, ScenarioFile};

use loanmix_core::ModelError;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_NONCONVERGENCE: u8 = 2;
pub const EXIT_ORACLE_BREACH: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Model(ModelError),
    #[error("oracle breach: {0}")]
    Breach(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Model(e) if e.is_solver_failure() => EXIT_NONCONVERGENCE,
            CliError::Model(_) => EXIT_INVALID,
            CliError::Breach(_) => EXIT_ORACLE_BREACH,
            CliError::Io(_) => EXIT_INVALID,
        }
    }

    pub fn message(&self) -> String {
        self.to_string()
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

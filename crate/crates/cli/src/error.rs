use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

impl From<hhgq_core::Error> for CliError {
    fn from(e: hhgq_core::Error) -> Self {
        use hhgq_core::Error as E;
        match e {
            E::InvalidParameter(_) => CliError::Config(e.to_string()),
            E::DegenerateState | E::DegenerateFit(_) => CliError::Data(e.to_string()),
            E::TruncationFailure { .. } | E::NoConvergence { .. } => CliError::Convergence(e.to_string()),
        }
    }
}

impl From<hhgq_timetag::TagError> for CliError {
    fn from(e: hhgq_timetag::TagError) -> Self {
        match e {
            hhgq_timetag::TagError::InvalidConfig(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<hhgq_sim::SimError> for CliError {
    fn from(e: hhgq_sim::SimError) -> Self {
        match e {
            hhgq_sim::SimError::Model(m) => m.into(),
            hhgq_sim::SimError::Tags(t) => t.into(),
            hhgq_sim::SimError::Io(io) => CliError::Io(io.to_string()),
            hhgq_sim::SimError::InvalidConfig(m) => CliError::Config(m),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

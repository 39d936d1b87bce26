use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] hhgq_core::Error),
    #[error(transparent)]
    Tags(#[from] hhgq_timetag::TagError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl From<serde_json::Error> for SimError {
    fn from(e: serde_json::Error) -> Self {
        SimError::InvalidConfig(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TagError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed time-tag data: {0}")]
    Format(String),
    #[error("channel {0} has no tags")]
    EmptyChannel(u8),
    #[error("only {found} usable satellite peaks, {required} required")]
    InsufficientSatellites { found: usize, required: usize },
    #[error("satellite coefficient of variation {cv:.3} exceeds {threshold:.3}")]
    PoorNormalization { cv: f64, threshold: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl From<csv::Error> for TagError {
    fn from(e: csv::Error) -> Self {
        TagError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, TagError>;

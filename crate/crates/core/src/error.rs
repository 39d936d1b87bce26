use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("number-basis truncation did not converge below dimension {ceiling}")]
    TruncationFailure { ceiling: usize },
    #[error("degenerate state: mean photon number is zero")]
    DegenerateState,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("optimizer did not converge within {budget} evaluations in any start")]
    NoConvergence { budget: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

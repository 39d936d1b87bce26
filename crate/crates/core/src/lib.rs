//! Photon statistics of multimode displaced squeezed thermal states.
//!
//! [`state`] evaluates per-mode normally ordered moments (from an explicit
//! number-basis construction and from Gaussian moment formulas) and combines
//! them into broadband `g²(0)`, `g³(0)` for independent spectral modes.
//! [`estimate`] builds model curves from the squeezer distribution and fits
//! its hyperparameters to measured correlation data.

pub mod error;
pub mod estimate;
pub mod state;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Photon time-tag streams and the coincidence analysis built on them.
//!
//! Streams are read from a small binary container or CSV, reduced to two-
//! and three-fold delay histograms, and normalized against the satellite
//! peaks produced by uncorrelated pulses.

pub mod error;
pub mod extract;
mod fit;
pub mod histogram;
mod peaks;
pub mod stream;
pub mod tags;

pub use error::{Result, TagError};
pub use extract::{
    aggregate_repetitions, csi_r, extract_g2, extract_g3, mean_photon_number, AnalysisConfig, CorrelationEstimate, CsiResult,
    MeanPhotonEstimate, Method,
};
pub use histogram::{coincidence_histogram_2, coincidence_histogram_3, Binning, Histogram1D, Histogram2D};
pub use tags::{TagRecord, TagStream};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Synthetic experiments: photon numbers drawn per laser pulse, thinned by
//! loss, split onto binary detectors and written as time tags.

pub mod config;
pub mod error;
pub mod generate;
pub mod optics;
pub mod sampler;

pub use config::{OpticsConfig, PairSourceConfig, SimConfig, Source};
pub use error::{Result, SimError};
pub use generate::{generate_timetags, sidecar_path, simulate, Expected, Truth};
pub use optics::OpticsChain;
pub use sampler::{sample_pulse_counts, PulseSampler};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

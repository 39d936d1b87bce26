use hhgq_core::state::{expand_hyperparams, HyperParams, ModeParams, MultimodeState, OracleConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const DEFAULT_REP_RATE_HZ: f64 = 1.866e7;
pub const MAX_ARMS: usize = 16;

/// Detection chain shared by every beam.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticsConfig {
    /// Probability that a photon survives filters, optics and detection.
    pub eta: f64,
    /// Fraction of the light sent to each detector of a beam.
    #[serde(default = "default_splitter")]
    pub splitter: Vec<f64>,
    #[serde(default = "default_jitter")]
    pub jitter_sigma_ps: f64,
    #[serde(default)]
    pub dead_time_ps: i64,
    #[serde(default = "default_rep_rate")]
    pub rep_rate_hz: f64,
    pub n_pulses: u64,
}

fn default_splitter() -> Vec<f64> {
    vec![0.5, 0.5]
}

fn default_jitter() -> f64 {
    100.0
}

fn default_rep_rate() -> f64 {
    DEFAULT_REP_RATE_HZ
}

impl OpticsConfig {
    pub fn new(eta: f64, arms: usize, n_pulses: u64) -> Self {
        Self {
            eta,
            splitter: vec![1.0 / arms as f64; arms],
            jitter_sigma_ps: default_jitter(),
            dead_time_ps: 0,
            rep_rate_hz: DEFAULT_REP_RATE_HZ,
            n_pulses,
        }
    }

    pub fn period_ps(&self) -> f64 {
        1e12 / self.rep_rate_hz
    }

    pub fn arms(&self) -> usize {
        self.splitter.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta = {} outside (0, 1]", self.eta));
        }
        if self.splitter.is_empty() || self.splitter.len() > MAX_ARMS {
            return bad(format!("between 1 and {MAX_ARMS} splitter arms required"));
        }
        if self.splitter.iter().any(|s| !(*s >= 0.0)) || (self.splitter.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("splitter fractions must be non-negative and sum to 1".into());
        }
        if !(self.rep_rate_hz.is_finite() && self.rep_rate_hz > 0.0) {
            return bad("repetition rate must be positive".into());
        }
        // Keeps tags of neighbouring pulses from trading places.
        if !(self.jitter_sigma_ps >= 0.0 && self.jitter_sigma_ps <= self.period_ps() / 20.0) {
            return bad(format!(
                "jitter must lie in [0, {:.0}] ps for this repetition rate",
                self.period_ps() / 20.0
            ));
        }
        if self.dead_time_ps < 0 {
            return bad("dead time must be non-negative".into());
        }
        Ok(())
    }
}

/// Two beams carrying identical, geometrically distributed photon numbers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSourceConfig {
    pub n_bar: f64,
}

impl PairSourceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_bar.is_finite() && self.n_bar > 0.0) {
            return Err(SimError::InvalidConfig(format!("n_bar = {} must be positive", self.n_bar)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Hyperparams(HyperParams),
    Modes { modes: Vec<ModeParams> },
    Pair(PairSourceConfig),
}

impl Source {
    pub fn beams(&self) -> usize {
        match self {
            Source::Pair(_) => 2,
            _ => 1,
        }
    }

    /// The multimode state for single-beam sources.
    pub fn state(&self) -> Result<Option<MultimodeState>> {
        Ok(match self {
            Source::Hyperparams(h) => Some(expand_hyperparams(h)?),
            Source::Modes { modes } => Some(MultimodeState::new(modes.clone())?),
            Source::Pair(_) => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Source::Pair(p) => p.validate(),
            _ => self.state().map(|_| ()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub source: Source,
    pub optics: OpticsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oracle: OracleConfig,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.optics.validate()?;
        if self.source.beams() * self.optics.arms() > 256 {
            return Err(SimError::InvalidConfig("more than 256 detector channels".into()));
        }
        Ok(())
    }
}

//! Per-pulse total photon numbers.
//!
//! Modes are independent, so the total is distributed as the convolution of
//! the single-mode number distributions; one alias-table draw per pulse is
//! equivalent to summing one draw per mode.

use hhgq_core::state::{photon_number_pmf, wick_m1_m2, ModeParams, MultimodeState, OracleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::error::{Result, SimError};

/// Pulses per independently seeded generator stream.
pub const BLOCK_PULSES: u64 = 1 << 16;

/// Probability mass below which the tail of a distribution is cut.
const TAIL: f64 = 1e-16;

fn mode_cutoff(m: &ModeParams) -> usize {
    let (m1, m2) = wick_m1_m2(m);
    let var = (m2 + m1 - m1 * m1).max(0.0);
    (m1 + 15.0 * var.sqrt() + 30.0).ceil() as usize
}

fn trim(mut p: Vec<f64>) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    let mut tail = 0.0;
    while p.len() > 1 {
        let last = *p.last().unwrap();
        if tail + last >= TAIL * total {
            break;
        }
        tail += last;
        p.pop();
    }
    p
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct PulseSampler {
    pmf: Vec<f64>,
    alias: Option<WeightedAliasIndex<f64>>,
}

impl PulseSampler {
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|p| !(*p >= 0.0)) || !(pmf.iter().sum::<f64>() > 0.0) {
            return Err(SimError::InvalidConfig("photon-number distribution is not normalizable".into()));
        }
        let pmf = trim(pmf);
        let alias = if pmf.len() > 1 {
            Some(WeightedAliasIndex::new(pmf.clone()).map_err(|e| SimError::InvalidConfig(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { pmf, alias })
    }

    pub fn from_state(s: &MultimodeState, cfg: &OracleConfig) -> Result<Self> {
        let per_mode: Vec<Vec<f64>> = s
            .modes()
            .par_iter()
            .map(|m| photon_number_pmf(m, mode_cutoff(m), cfg).map(trim))
            .collect::<std::result::Result<_, _>>()?;
        let total = per_mode.iter().fold(vec![1.0], |acc, p| trim(convolve(&acc, p)));
        Self::from_pmf(total)
    }

    /// Distribution of the total photon number.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.alias {
            Some(a) => a.sample(rng) as u32,
            None => 0,
        }
    }
}

/// Generator for pulse block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Total photon number of each of `n_pulses` pulses.
pub fn sample_pulse_counts(s: &MultimodeState, n_pulses: u64, seed: u64, cfg: &OracleConfig) -> Result<Vec<u32>> {
    let sampler = PulseSampler::from_state(s, cfg)?;
    let blocks = n_pulses.div_ceil(BLOCK_PULSES);
    let parts: Vec<Vec<u32>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let len = BLOCK_PULSES.min(n_pulses - b * BLOCK_PULSES);
            (0..len).map(|_| sampler.sample(&mut rng)).collect()
        })
        .collect();
    Ok(parts.concat())
}

//! Loss, beam splitting and binary detection of one pulse.

use hhgq_timetag::TagRecord;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{OpticsConfig, MAX_ARMS};
use crate::error::{Result, SimError};

#[derive(Clone, Debug)]
pub struct OpticsChain {
    eta: f64,
    cumulative: Vec<f64>,
    jitter: Option<Normal<f64>>,
    period_ps: f64,
}

impl OpticsChain {
    pub fn new(cfg: &OpticsConfig) -> Result<Self> {
        cfg.validate()?;
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = cfg
            .splitter
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = f64::INFINITY;
        let jitter = if cfg.jitter_sigma_ps > 0.0 {
            Some(Normal::new(0.0, cfg.jitter_sigma_ps).map_err(|e| SimError::InvalidConfig(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            eta: cfg.eta,
            cumulative,
            jitter,
            period_ps: cfg.period_ps(),
        })
    }

    pub fn arms(&self) -> usize {
        self.cumulative.len()
    }

    pub fn pulse_time_ps(&self, pulse: u64) -> f64 {
        pulse as f64 * self.period_ps
    }

    /// Which arms of one beam receive at least one surviving photon.
    pub fn hits<R: Rng + ?Sized>(&self, photons: u32, rng: &mut R) -> [bool; MAX_ARMS] {
        let mut hit = [false; MAX_ARMS];
        for _ in 0..photons {
            if rng.random::<f64>() < self.eta {
                let u: f64 = rng.random();
                let arm = self.cumulative.partition_point(|&c| c <= u);
                hit[arm] = true;
            }
        }
        hit
    }

    /// Appends the clicks of one pulse; `photons[b]` is the photon number in
    /// beam `b`, whose detectors are channels `b·arms .. (b+1)·arms`.
    pub fn detect<R: Rng + ?Sized>(&self, photons: &[u32], pulse: u64, rng: &mut R, out: &mut Vec<TagRecord>) {
        let t0 = self.pulse_time_ps(pulse);
        let arms = self.arms();
        for (beam, &n) in photons.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let hit = self.hits(n, rng);
            for (arm, _) in hit[..arms].iter().enumerate().filter(|(_, h)| **h) {
                let dt = self.jitter.map_or(0.0, |j| j.sample(rng));
                out.push(TagRecord::new((beam * arms + arm) as u8, (t0 + dt).round() as i64));
            }
        }
    }
}

/// Drops clicks closer than `dead_ps` to the previous registered click of
/// the same channel. `last` carries that state across calls; records must be
/// in time order.
pub fn apply_dead_time(records: &mut Vec<TagRecord>, dead_ps: i64, last: &mut [Option<i64>]) {
    if dead_ps == 0 {
        return;
    }
    records.retain(|r| {
        let slot = &mut last[r.channel as usize];
        match *slot {
            Some(t) if r.timestamp_ps - t < dead_ps => false,
            _ => {
                *slot = Some(r.timestamp_ps);
                true
            }
        }
    });
}

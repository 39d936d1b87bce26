//! End-to-end generation of tagged detector streams.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hhgq_core::state::broadband_moments;
use hhgq_timetag::tags::Header;
use hhgq_timetag::{TagRecord, TagStream};
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{OpticsConfig, SimConfig, Source};
use crate::error::{Result, SimError};
use crate::optics::{apply_dead_time, OpticsChain};
use crate::sampler::{block_rng, PulseSampler, BLOCK_PULSES};

/// Analytic correlations of the simulated source, before detection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expected {
    State {
        mean_n: f64,
        g2: f64,
        g3: f64,
    },
    Pair {
        n_bar: f64,
        g2_auto: f64,
        g2_cross: f64,
        #[serde(rename = "R")]
        r: f64,
    },
}

/// Sidecar describing how a stream was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub generator_version: String,
    pub seed: u64,
    pub source: Source,
    pub optics: OpticsConfig,
    pub channel_count: u16,
    pub period_ps: f64,
    pub records_per_channel: Vec<u64>,
    pub clicks_per_pulse: Vec<f64>,
    pub expected: Option<Expected>,
}

impl Truth {
    pub fn max_clicks_per_pulse(&self) -> f64 {
        self.clicks_per_pulse.iter().copied().fold(0.0, f64::max)
    }
}

enum Emitter {
    State(PulseSampler),
    Pair(Geometric),
}

fn expected(cfg: &SimConfig) -> Result<Option<Expected>> {
    Ok(match &cfg.source {
        Source::Pair(p) => Some(Expected::Pair {
            n_bar: p.n_bar,
            g2_auto: 2.0,
            g2_cross: 2.0 + 1.0 / p.n_bar,
            r: (2.0 + 1.0 / p.n_bar).powi(2) / 4.0,
        }),
        _ => {
            let s = cfg.source.state()?.expect("single-beam source");
            broadband_moments(&s, &cfg.oracle).ok().map(|b| Expected::State {
                mean_n: b.mean_n,
                g2: b.g2,
                g3: b.g3,
            })
        }
    })
}

fn run(cfg: &SimConfig, mut sink: impl FnMut(&[TagRecord]) -> Result<()>) -> Result<Truth> {
    cfg.validate()?;
    let emitter = match &cfg.source {
        Source::Pair(p) => Emitter::Pair(
            Geometric::new(1.0 / (1.0 + p.n_bar)).map_err(|e| SimError::InvalidConfig(e.to_string()))?,
        ),
        _ => Emitter::State(PulseSampler::from_state(
            &cfg.source.state()?.expect("single-beam source"),
            &cfg.oracle,
        )?),
    };
    let chain = OpticsChain::new(&cfg.optics)?;
    let beams = cfg.source.beams();
    let channels = beams * chain.arms();
    let n_pulses = cfg.optics.n_pulses;
    let blocks = n_pulses.div_ceil(BLOCK_PULSES);
    let batch = (rayon::current_num_threads() as u64 * 4).max(1);

    let mut per_channel = vec![0u64; channels];
    let mut last = vec![None; channels];
    let mut start = 0;
    while start < blocks {
        let end = (start + batch).min(blocks);
        let parts: Vec<Vec<TagRecord>> = (start..end)
            .into_par_iter()
            .map(|b| {
                let mut rng = block_rng(cfg.seed, b);
                let first = b * BLOCK_PULSES;
                let last_pulse = (first + BLOCK_PULSES).min(n_pulses);
                let mut out = Vec::new();
                for pulse in first..last_pulse {
                    match &emitter {
                        Emitter::State(s) => {
                            let n = s.sample(&mut rng);
                            chain.detect(&[n], pulse, &mut rng, &mut out);
                        }
                        Emitter::Pair(g) => {
                            let n = g.sample(&mut rng).min(u64::from(u32::MAX)) as u32;
                            chain.detect(&[n, n], pulse, &mut rng, &mut out);
                        }
                    }
                }
                out.sort_unstable_by_key(|r| (r.timestamp_ps, r.channel));
                out
            })
            .collect();
        for mut part in parts {
            apply_dead_time(&mut part, cfg.optics.dead_time_ps, &mut last);
            for r in &part {
                per_channel[r.channel as usize] += 1;
            }
            sink(&part)?;
        }
        start = end;
    }

    Ok(Truth {
        generator_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        source: cfg.source.clone(),
        optics: cfg.optics.clone(),
        channel_count: channels as u16,
        period_ps: cfg.optics.period_ps(),
        clicks_per_pulse: per_channel
            .iter()
            .map(|&c| if n_pulses > 0 { c as f64 / n_pulses as f64 } else { 0.0 })
            .collect(),
        records_per_channel: per_channel,
        expected: expected(cfg)?,
    })
}

/// Runs the experiment in memory.
pub fn simulate(cfg: &SimConfig) -> Result<(TagStream, Truth)> {
    let mut records = Vec::new();
    let truth = run(cfg, |part| {
        records.extend_from_slice(part);
        Ok(())
    })?;
    Ok((TagStream::new(truth.channel_count, records)?, truth))
}

/// `<path>.truth.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

/// Streams the experiment to a binary tag file and writes the truth sidecar.
pub fn generate_timetags(cfg: &SimConfig, path: &Path) -> Result<Truth> {
    cfg.validate()?;
    let mut w = BufWriter::new(File::create(path)?);
    let channels = cfg.source.beams() * cfg.optics.arms();
    let header = Header {
        version: hhgq_timetag::tags::VERSION,
        channel_count: channels as u16,
    };
    w.write_all(&header.to_bytes())?;
    let truth = run(cfg, |part| {
        for r in part {
            w.write_all(&r.to_bytes())?;
        }
        Ok(())
    })?;
    w.flush()?;
    let side = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(side, &truth)?;
    Ok(truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PairSourceConfig;
    use hhgq_core::state::{ModeParams, OracleConfig};

    fn cfg(source: Source, eta: f64, arms: usize, n: u64) -> SimConfig {
        SimConfig {
            source,
            optics: OpticsConfig::new(eta, arms, n),
            seed: 4,
            oracle: OracleConfig::default(),
        }
    }

    #[test]
    fn in_memory_and_file_agree() {
        let c = cfg(
            Source::Modes {
                modes: vec![ModeParams::thermal(0.5)],
            },
            0.5,
            2,
            200_000,
        );
        let (stream, truth) = simulate(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        let t2 = generate_timetags(&c, &path).unwrap();
        assert_eq!(truth, t2);
        assert_eq!(TagStream::load(&path).unwrap(), stream);
        let side: Truth = serde_json::from_reader(File::open(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(side, truth);
        assert!(stream.records.windows(2).all(|w| w[0].timestamp_ps <= w[1].timestamp_ps));
        assert_eq!(truth.records_per_channel.iter().sum::<u64>() as usize, stream.len());
        match truth.expected {
            Some(Expected::State { g2, .. }) => assert!((g2 - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vacuum_run_has_no_records() {
        let c = cfg(
            Source::Modes {
                modes: vec![ModeParams::vacuum()],
            },
            1.0,
            2,
            10_000,
        );
        let (stream, truth) = simulate(&c).unwrap();
        assert!(stream.is_empty());
        assert_eq!(truth.expected, None);
    }

    #[test]
    fn pair_source_truth() {
        let c = cfg(Source::Pair(PairSourceConfig { n_bar: 1.0 }), 0.1, 2, 1000);
        let (_, truth) = simulate(&c).unwrap();
        assert_eq!(truth.channel_count, 4);
        match truth.expected {
            Some(Expected::Pair { g2_cross, r, .. }) => {
                assert_eq!(g2_cross, 3.0);
                assert_eq!(r, 2.25);
            }
            other => panic!("{other:?}"),
        }
    }
}

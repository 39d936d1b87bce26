use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{objective_against, DataSetPoint};
use super::simplex::{minimize, SimplexOptions};
use super::curve::model_curve;
use crate::error::{Error, Result};
use crate::state::{HyperParams, OracleConfig};

/// Search box for `(B, μ, α, n_th)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bounds {
    #[serde(rename = "B")]
    pub b: [f64; 2],
    pub mu: [f64; 2],
    pub alpha: [f64; 2],
    pub n_th: [f64; 2],
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            b: [0.0, 2.0],
            mu: [0.0, 0.95],
            alpha: [0.0, 2.0],
            n_th: [0.0, 0.5],
        }
    }
}

impl Bounds {
    fn lower(&self) -> [f64; 4] {
        [self.b[0], self.mu[0], self.alpha[0], self.n_th[0]]
    }

    fn upper(&self) -> [f64; 4] {
        [self.b[1], self.mu[1], self.alpha[1], self.n_th[1]]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("B", self.b), ("mu", self.mu), ("alpha", self.alpha), ("n_th", self.n_th)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParameter(format!("bad bounds for {name}: [{lo}, {hi}]")));
            }
        }
        if self.mu[0] < 0.0 || self.mu[1] >= 1.0 || self.b[0] < 0.0 || self.n_th[0] < 0.0 {
            return Err(Error::InvalidParameter("bounds leave the valid parameter region".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub bounds: Bounds,
    pub n_starts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per start.
    pub max_evals: usize,
    /// Number of spectral modes in the model.
    pub d: usize,
    pub ftol: f64,
    pub xtol: f64,
    pub oracle: OracleConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        let s = SimplexOptions::default();
        Self {
            bounds: Bounds::default(),
            n_starts: 16,
            seed: 0,
            max_evals: s.max_evals,
            d: 50,
            ftol: s.ftol,
            xtol: s.xtol,
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: [f64; 4],
    pub best: [f64; 4],
    pub objective_value: f64,
    pub n_evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub hyperparams: HyperParams,
    pub objective_value: f64,
    /// Evaluations summed over all starts.
    pub n_evaluations: usize,
    /// Index of the start that produced the optimum.
    pub start_index: usize,
    pub converged: bool,
    pub starts: Vec<StartOutcome>,
}

/// Starting points as Latin-hypercube blocks of sizes 1, 1, 2, 4, 8, …, each
/// drawn from its own ChaCha stream, so `n` starts are always a prefix of
/// `n + 1` starts.
pub fn latin_hypercube_starts(bounds: &Bounds, n: usize, seed: u64) -> Vec<[f64; 4]> {
    let lo = bounds.lower();
    let hi = bounds.upper();
    let mut out = Vec::with_capacity(n);
    let mut block = 0u64;
    while out.len() < n {
        let size = if block == 0 { 1 } else { 1usize << (block - 1) };
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(4);
        for _ in 0..4 {
            let mut strata: Vec<usize> = (0..size).collect();
            for i in (1..size).rev() {
                let j = rng.random_range(0..=i);
                strata.swap(i, j);
            }
            cols.push(
                strata
                    .into_iter()
                    .map(|s| (s as f64 + rng.random::<f64>()) / size as f64)
                    .collect(),
            );
        }
        for i in 0..size {
            if out.len() == n {
                break;
            }
            let mut p = [0.0; 4];
            for (d, pv) in p.iter_mut().enumerate() {
                *pv = lo[d] + cols[d][i] * (hi[d] - lo[d]);
            }
            out.push(p);
        }
        block += 1;
    }
    out
}

fn to_hyper(x: &[f64], d: usize) -> HyperParams {
    HyperParams {
        b: x[0],
        mu: x[1],
        alpha: x[2],
        n_th: x[3],
        d,
    }
}

/// Multi-start bounded simplex minimization of [`objective`](super::objective).
pub fn fit_parameters(data: &[DataSetPoint], cfg: &FitConfig) -> Result<FitResult> {
    cfg.bounds.validate()?;
    if cfg.n_starts == 0 {
        return Err(Error::InvalidParameter("n_starts must be positive".into()));
    }
    if data.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 data points, got {}", data.len())));
    }
    for p in data {
        p.validate()?;
    }
    let lower = cfg.bounds.lower();
    let upper = cfg.bounds.upper();
    let opts = SimplexOptions {
        max_evals: cfg.max_evals,
        ftol: cfg.ftol,
        xtol: cfg.xtol,
        ..SimplexOptions::default()
    };
    let eval = |x: &[f64]| -> f64 {
        let h = to_hyper(x, cfg.d);
        model_curve(&h, &cfg.oracle)
            .and_then(|curve| objective_against(data, &curve))
            .unwrap_or(f64::INFINITY)
    };

    let starts = latin_hypercube_starts(&cfg.bounds, cfg.n_starts, cfg.seed);
    let outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .map(|s| {
            let r = minimize(eval, s, &lower, &upper, &opts);
            StartOutcome {
                start: *s,
                best: [r.x[0], r.x[1], r.x[2], r.x[3]],
                objective_value: r.f,
                n_evaluations: r.evals,
                converged: r.converged,
            }
        })
        .collect();

    if !outcomes.iter().any(|o| o.converged) {
        return Err(Error::NoConvergence { budget: cfg.max_evals });
    }
    let (start_index, best) = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.objective_value.total_cmp(&b.1.objective_value))
        .expect("at least one start");
    Ok(FitResult {
        hyperparams: to_hyper(&best.best, cfg.d),
        objective_value: best.objective_value,
        n_evaluations: outcomes.iter().map(|o| o.n_evaluations).sum(),
        start_index,
        converged: best.converged,
        starts: outcomes.clone(),
    })
}

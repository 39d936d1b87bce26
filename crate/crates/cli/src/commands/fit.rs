use std::path::Path;

use hhgq_core::estimate::{crossover_fit, fit_parameters, model_curve, summarize, CrossoverFit, CurveSummary, FitConfig, FitResult};
use hhgq_core::state::{schmidt_number, schmidt_number_mu, squeezer_weights};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io;
use crate::{Cli, Provenance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub provenance: Provenance,
    pub result: FitResult,
    /// `(1+μ²)/(1−μ²)` of the fitted μ.
    pub schmidt_number: f64,
    /// Participation ratio of the `d` fitted modes.
    pub schmidt_number_finite: f64,
    pub data_summary: CurveSummary,
    pub model_summary: CurveSummary,
}

pub fn run_fit(cli: &Cli, data: &Path) -> Result<()> {
    let mut cfg: FitConfig = io::config_or_default(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.bounds.validate()?;
    if cfg.n_starts == 0 || cfg.d == 0 || cfg.max_evals == 0 {
        return Err(CliError::Config("n_starts, d and max_evals must be positive".into()));
    }
    let points = io::read_dataset(data)?;
    let provenance = Provenance::new("fit", &cfg, Some(cfg.seed), &[data])?;

    let result = fit_parameters(&points, &cfg).map_err(|e| match e {
        hhgq_core::Error::InvalidParameter(m) => CliError::Data(m),
        other => other.into(),
    })?;
    let h = result.hyperparams;
    let curve = model_curve(&h, &cfg.oracle)?;
    io::write_csv(&cli.out.join("model_curve.csv"), &curve)?;

    let col = |f: fn(&hhgq_core::estimate::DataSetPoint) -> f64| points.iter().map(f).collect::<Vec<_>>();
    let data_summary = summarize(&col(|p| p.mean_n), &col(|p| p.g2), &col(|p| p.g3))?;
    let model_summary = summarize(
        &curve.iter().map(|p| p.mean_n).collect::<Vec<_>>(),
        &curve.iter().map(|p| p.g2).collect::<Vec<_>>(),
        &curve.iter().map(|p| p.g3).collect::<Vec<_>>(),
    )?;
    let out = FitOutput {
        provenance,
        schmidt_number: schmidt_number_mu(h.mu)?,
        schmidt_number_finite: schmidt_number(&squeezer_weights(h.mu, h.d))?,
        result,
        data_summary,
        model_summary,
    };
    println!(
        "B = {:.4}, mu = {:.4}, alpha = {:.4}, n_th = {:.5} (objective {:.3e}, K = {:.3})",
        h.b, h.mu, h.alpha, h.n_th, out.result.objective_value, out.schmidt_number
    );
    io::write_json(&cli.out.join("fit.json"), &out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YieldPoint {
    pub intensity: f64,
    #[serde(rename = "yield")]
    pub value: f64,
}

#[derive(Serialize)]
struct CurveRow {
    intensity: f64,
    #[serde(rename = "yield")]
    value: f64,
    model: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverOutput {
    pub provenance: Provenance,
    pub fit: CrossoverFit,
}

/// The fitted broken power law at intensity `x`.
pub fn crossover_model(f: &CrossoverFit, x: f64) -> f64 {
    let p = if x < f.break_point { f.p_low } else { f.p_high };
    f.break_yield * (x / f.break_point).powf(p)
}

pub fn run_crossover(cli: &Cli, data: &Path) -> Result<()> {
    if cli.config.is_some() {
        return Err(CliError::Config("crossover takes no configuration".into()));
    }
    let points: Vec<YieldPoint> = io::read_csv(data)?;
    let provenance = Provenance::new("crossover", &serde_json::json!({}), None, &[data])?;
    let xs: Vec<f64> = points.iter().map(|p| p.intensity).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value).collect();
    let fit = crossover_fit(&xs, &ys).map_err(|e| CliError::Data(e.to_string()))?;
    io::write_csv(
        &cli.out.join("crossover_curve.csv"),
        points.iter().map(|p| CurveRow {
            intensity: p.intensity,
            value: p.value,
            model: crossover_model(&fit, p.intensity),
        }),
    )?;
    println!(
        "exponents {:.3} below and {:.3} above intensity {:.4}{}",
        fit.p_low,
        fit.p_high,
        fit.break_point,
        if fit.break_constrained { "" } else { " (break not constrained)" }
    );
    io::write_json(&cli.out.join("crossover.json"), &CrossoverOutput { provenance, fit })
}

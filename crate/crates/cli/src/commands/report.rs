use std::path::{Path, PathBuf};

use hhgq_core::estimate::{model_curve, summarize, CurvePoint, CurveSummary};
use hhgq_core::state::{schmidt_number, schmidt_number_mu, squeezer_weights, squeezing_db, HyperParams, OracleConfig};
use hhgq_timetag::CsiResult;
use serde::{Deserialize, Serialize};

use super::analyze::CsiOutput;
use super::fit::FitOutput;
use crate::error::{CliError, Result};
use crate::io;
use crate::{Cli, Provenance};

/// A harmonic is described either by explicit hyperparameters or by the
/// output of a previous `fit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicEntry {
    pub name: String,
    #[serde(default)]
    pub hyperparams: Option<HyperParams>,
    #[serde(default)]
    pub fit: Option<PathBuf>,
    /// Measured points shown next to the model, `mean_n,g2,g2_err,g3,g3_err[,intensity]`.
    #[serde(default)]
    pub data: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsiEntry {
    pub intensity: f64,
    /// A `csi.json` written by the `csi` command.
    pub path: PathBuf,
}

/// Relative paths are resolved against the directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub harmonics: Vec<HarmonicEntry>,
    #[serde(default)]
    pub csi: Vec<CsiEntry>,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub name: String,
    pub hyperparams: HyperParams,
    pub schmidt_number: f64,
    pub schmidt_number_finite: f64,
    pub max_squeezing_db: f64,
    pub mean_n: f64,
    pub g2: f64,
    pub g3: f64,
    /// Absent when the curve does not vary with the mode count.
    pub summary: Option<CurveSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsiPoint {
    pub intensity: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "R_err")]
    pub r_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOutput {
    pub provenance: Provenance,
    pub harmonics: Vec<HarmonicReport>,
    pub csi: Vec<CsiPoint>,
}

#[derive(Serialize)]
struct SqueezerRow<'a> {
    harmonic: &'a str,
    k: usize,
    lambda: f64,
    r: f64,
    squeezing_db: f64,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    harmonic: &'a str,
    k: usize,
    mean_n: f64,
    g2: f64,
    g3: f64,
}

#[derive(Serialize)]
struct DataRow<'a> {
    harmonic: &'a str,
    mean_n: f64,
    g2: f64,
    g2_err: f64,
    g3: f64,
    g3_err: f64,
    intensity: Option<f64>,
}

fn hyperparams_of(entry: &HarmonicEntry, base: &Path, inputs: &mut Vec<PathBuf>) -> Result<HyperParams> {
    match (&entry.hyperparams, &entry.fit) {
        (Some(h), None) => {
            h.validate()?;
            Ok(*h)
        }
        (None, Some(p)) => {
            let p = io::relative_to(base, p);
            let fit: FitOutput = io::read_json(&p)?;
            inputs.push(p);
            Ok(fit.result.hyperparams)
        }
        _ => Err(CliError::Config(format!(
            "harmonic {}: give exactly one of hyperparams and fit",
            entry.name
        ))),
    }
}

fn curve_rows<'a>(name: &'a str, c: &'a [CurvePoint]) -> impl Iterator<Item = CurveRow<'a>> + 'a {
    c.iter().map(move |p| CurveRow {
        harmonic: name,
        k: p.k,
        mean_n: p.mean_n,
        g2: p.g2,
        g3: p.g3,
    })
}

pub fn run(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("report needs --config".into()))?;
    let cfg: ReportConfig = io::read_config(path)?;
    if cfg.harmonics.is_empty() && cfg.csi.is_empty() {
        return Err(CliError::Config("report has nothing to tabulate".into()));
    }

    let mut inputs = Vec::new();
    let mut resolved = Vec::new();
    for h in &cfg.harmonics {
        resolved.push(hyperparams_of(h, path, &mut inputs)?);
    }
    let mut datasets = Vec::new();
    for h in &cfg.harmonics {
        let d = match &h.data {
            Some(p) => {
                let p = io::relative_to(path, p);
                let points = io::read_dataset(&p)?;
                inputs.push(p);
                points
            }
            None => Vec::new(),
        };
        datasets.push(d);
    }
    let mut csi = Vec::new();
    for e in &cfg.csi {
        let p = io::relative_to(path, &e.path);
        let out: CsiOutput = io::read_json(&p)?;
        inputs.push(p);
        let CsiResult { r, std_error, .. } = out.csi;
        csi.push(CsiPoint {
            intensity: e.intensity,
            r,
            r_err: std_error,
        });
    }
    csi.sort_by(|a, b| a.intensity.total_cmp(&b.intensity));

    let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let provenance = Provenance::new("report", &cfg, None, &refs)?;

    let mut squeezers = Vec::new();
    let mut curves = Vec::new();
    let mut transitions = Vec::new();
    let mut harmonics = Vec::new();
    for (entry, h) in cfg.harmonics.iter().zip(&resolved) {
        let weights = squeezer_weights(h.mu, h.d);
        for (k, &lambda) in weights.iter().enumerate() {
            squeezers.push((entry.name.as_str(), k, lambda, h.b * lambda));
        }
        let curve = model_curve(h, &cfg.oracle)?;
        let pure = HyperParams { alpha: 0.0, n_th: 0.0, ..*h };
        let transition = if h.b > 0.0 { model_curve(&pure, &cfg.oracle)? } else { Vec::new() };
        let col = |f: fn(&CurvePoint) -> f64| curve.iter().map(f).collect::<Vec<_>>();
        let last = *curve.last().expect("d ≥ 1");
        harmonics.push(HarmonicReport {
            name: entry.name.clone(),
            hyperparams: *h,
            schmidt_number: schmidt_number_mu(h.mu)?,
            schmidt_number_finite: schmidt_number(&weights)?,
            max_squeezing_db: squeezing_db(h.b * weights[0]),
            mean_n: last.mean_n,
            g2: last.g2,
            g3: last.g3,
            summary: summarize(&col(|p| p.mean_n), &col(|p| p.g2), &col(|p| p.g3)).ok(),
        });
        curves.push(curve);
        transitions.push(transition);
    }

    io::write_csv(
        &cli.out.join("squeezer_distribution.csv"),
        squeezers.iter().map(|&(harmonic, k, lambda, r)| SqueezerRow {
            harmonic,
            k,
            lambda,
            r,
            squeezing_db: squeezing_db(r),
        }),
    )?;
    let names: Vec<&str> = cfg.harmonics.iter().map(|h| h.name.as_str()).collect();
    io::write_csv(
        &cli.out.join("model_curves.csv"),
        names.iter().zip(&curves).flat_map(|(n, c)| curve_rows(n, c)),
    )?;
    io::write_csv(
        &cli.out.join("transition_curves.csv"),
        names.iter().zip(&transitions).flat_map(|(n, c)| curve_rows(n, c)),
    )?;
    io::write_csv(
        &cli.out.join("data_points.csv"),
        names.iter().zip(&datasets).flat_map(|(n, d)| {
            d.iter().map(move |p| DataRow {
                harmonic: n,
                mean_n: p.mean_n,
                g2: p.g2,
                g2_err: p.g2_err,
                g3: p.g3,
                g3_err: p.g3_err,
                intensity: p.intensity,
            })
        }),
    )?;
    io::write_csv(&cli.out.join("csi_vs_intensity.csv"), &csi)?;

    for h in &harmonics {
        println!(
            "{}: K_eff = {:.3}, max squeezing {:.2} dB, g2 = {:.4}, g3 = {:.4}",
            h.name, h.schmidt_number, h.max_squeezing_db, h.g2, h.g3
        );
    }
    io::write_json(
        &cli.out.join("report.json"),
        &ReportOutput {
            provenance,
            harmonics,
            csi,
        },
    )
}

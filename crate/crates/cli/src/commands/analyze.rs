use std::path::{Path, PathBuf};

use hhgq_sim::config::DEFAULT_REP_RATE_HZ;
use hhgq_sim::{sidecar_path, Truth};
use hhgq_timetag::{
    aggregate_repetitions, coincidence_histogram_2, coincidence_histogram_3, csi_r, extract_g2, extract_g3,
    mean_photon_number, AnalysisConfig, Binning, CorrelationEstimate, CsiResult, Histogram1D, MeanPhotonEstimate,
    TagStream,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io;
use crate::{Cli, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinningConfig {
    pub bin_width_ps: i64,
    /// Histogram half-range in laser periods.
    pub range_periods: f64,
}

impl BinningConfig {
    fn binning(&self, period_ps: f64) -> Result<Binning> {
        if !(self.range_periods > 0.0) {
            return Err(CliError::Config("range_periods must be positive".into()));
        }
        Ok(Binning::covering(self.bin_width_ps, self.range_periods * period_ps)?)
    }
}

/// Loss-corrected `⟨n⟩` from the click totals of one beam's detectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanPhotonConfig {
    pub channels: Vec<u8>,
    pub eta: f64,
    /// Taken from the truth sidecar when omitted.
    #[serde(default)]
    pub n_pulses: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct G2Config {
    pub channels: [u8; 2],
    pub binning: BinningConfig,
    /// Laser period; taken from the truth sidecar, else the default rate.
    pub period_ps: Option<f64>,
    pub analysis: AnalysisConfig,
    pub mean_photon: Option<MeanPhotonConfig>,
}

impl Default for G2Config {
    fn default() -> Self {
        Self {
            channels: [0, 1],
            binning: BinningConfig {
                bin_width_ps: 100,
                range_periods: 25.0,
            },
            period_ps: None,
            analysis: AnalysisConfig::default(),
            mean_photon: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct G3Config {
    pub channels: [u8; 3],
    pub binning: BinningConfig,
    pub period_ps: Option<f64>,
    pub analysis: AnalysisConfig,
    pub mean_photon: Option<MeanPhotonConfig>,
}

impl Default for G3Config {
    fn default() -> Self {
        Self {
            channels: [0, 1, 2],
            binning: BinningConfig {
                bin_width_ps: 200,
                range_periods: 4.5,
            },
            period_ps: None,
            analysis: AnalysisConfig::default(),
            mean_photon: None,
        }
    }
}

/// Two beams; each pair names the detectors whose coincidences are counted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsiConfig {
    pub auto_i: [u8; 2],
    pub auto_j: [u8; 2],
    pub cross: [u8; 2],
    pub binning: BinningConfig,
    pub period_ps: Option<f64>,
    pub analysis: AnalysisConfig,
}

impl Default for CsiConfig {
    fn default() -> Self {
        Self {
            auto_i: [0, 1],
            auto_j: [2, 3],
            cross: [0, 2],
            binning: G2Config::default().binning,
            period_ps: None,
            analysis: AnalysisConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEstimate {
    pub input: String,
    pub estimate: CorrelationEstimate,
    pub mean_photon: Option<MeanPhotonEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOutput {
    pub provenance: Provenance,
    pub results: Vec<FileEstimate>,
    /// Mean and spread over repetitions when several files were given.
    pub aggregate: Option<CorrelationEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsiTriple {
    pub g2_ii: CorrelationEstimate,
    pub g2_jj: CorrelationEstimate,
    pub g2_ij: CorrelationEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsiRepetition {
    pub input: String,
    pub correlations: CsiTriple,
    pub csi: CsiResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsiOutput {
    pub provenance: Provenance,
    pub repetitions: Vec<CsiRepetition>,
    pub combined: CsiTriple,
    pub csi: CsiResult,
}

fn load_truth(tagfile: &Path) -> Result<Option<Truth>> {
    let side = sidecar_path(tagfile);
    if side.exists() {
        io::read_json(&side).map(Some)
    } else {
        Ok(None)
    }
}

/// Resolves the laser period: config, then sidecars (which must agree),
/// then the default repetition rate.
fn resolve_period(configured: Option<f64>, truths: &[Option<Truth>]) -> Result<f64> {
    if let Some(p) = configured {
        if !(p.is_finite() && p > 0.0) {
            return Err(CliError::Config(format!("period_ps = {p} must be positive")));
        }
        return Ok(p);
    }
    let mut found: Option<f64> = None;
    for t in truths.iter().flatten() {
        match found {
            Some(p) if p != t.period_ps => {
                return Err(CliError::Data("tag files were generated with different periods".into()));
            }
            _ => found = Some(t.period_ps),
        }
    }
    Ok(found.unwrap_or(1e12 / DEFAULT_REP_RATE_HZ))
}

fn resolve_mean_photon(cfg: &Option<MeanPhotonConfig>, truths: &[Option<Truth>]) -> Result<Option<MeanPhotonConfig>> {
    let Some(c) = cfg else { return Ok(None) };
    if c.n_pulses.is_some() {
        return Ok(Some(c.clone()));
    }
    let mut n = None;
    for t in truths {
        let t = t
            .as_ref()
            .ok_or_else(|| CliError::Config("mean_photon.n_pulses is required without a truth sidecar".into()))?;
        match n {
            Some(v) if v != t.optics.n_pulses => {
                return Err(CliError::Config("tag files differ in pulse count; set mean_photon.n_pulses".into()));
            }
            _ => n = Some(t.optics.n_pulses),
        }
    }
    Ok(Some(MeanPhotonConfig {
        n_pulses: n,
        ..c.clone()
    }))
}

fn load_tags(path: &Path) -> Result<TagStream> {
    TagStream::load(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn numbered(out: &Path, stem: &str, i: usize, n: usize) -> PathBuf {
    if n == 1 {
        out.join(format!("{stem}.csv"))
    } else {
        out.join(format!("{stem}_{i}.csv"))
    }
}

fn mean_photon(tags: &TagStream, cfg: &Option<MeanPhotonConfig>) -> Result<Option<MeanPhotonEstimate>> {
    cfg.as_ref()
        .map(|m| mean_photon_number(tags, &m.channels, m.n_pulses.expect("resolved"), m.eta))
        .transpose()
        .map_err(Into::into)
}

fn aggregate(estimates: &[CorrelationEstimate]) -> Result<Option<CorrelationEstimate>> {
    if estimates.len() > 1 {
        Ok(Some(aggregate_repetitions(estimates)?))
    } else {
        Ok(None)
    }
}

fn inputs(files: &[PathBuf]) -> Vec<&Path> {
    files.iter().map(PathBuf::as_path).collect()
}

fn print_estimate(label: &str, e: &CorrelationEstimate) {
    println!(
        "{label} = {:.4} ± {:.4} ({} satellites, cv {:.3}, {:?})",
        e.value, e.std_error, e.n_satellites_used, e.satellite_cv, e.method
    );
}

pub fn run_g2(cli: &Cli, files: &[PathBuf]) -> Result<()> {
    let mut cfg: G2Config = io::config_or_default(cli.config.as_deref())?;
    cfg.analysis.validate()?;
    let truths = files.iter().map(|f| load_truth(f)).collect::<Result<Vec<_>>>()?;
    let period = resolve_period(cfg.period_ps, &truths)?;
    cfg.period_ps = Some(period);
    cfg.mean_photon = resolve_mean_photon(&cfg.mean_photon, &truths)?;
    let binning = cfg.binning.binning(period)?;
    let provenance = Provenance::new("analyze-g2", &cfg, None, &inputs(files))?;

    let mut results = Vec::new();
    for (i, f) in files.iter().enumerate() {
        let tags = load_tags(f)?;
        let h = coincidence_histogram_2(&tags, cfg.channels[0], cfg.channels[1], binning)?;
        let mut w = io::create(&numbered(&cli.out, "g2_histogram", i, files.len()))?;
        h.write_csv(&mut w)?;
        let estimate = extract_g2(&h, period, &cfg.analysis)?;
        print_estimate(&format!("{}: g2", f.display()), &estimate);
        results.push(FileEstimate {
            input: f.display().to_string(),
            estimate,
            mean_photon: mean_photon(&tags, &cfg.mean_photon)?,
        });
    }
    let aggregate = aggregate(&results.iter().map(|r| r.estimate.clone()).collect::<Vec<_>>())?;
    if let Some(a) = &aggregate {
        print_estimate("aggregate g2", a);
    }
    io::write_json(
        &cli.out.join("g2.json"),
        &CorrelationOutput {
            provenance,
            results,
            aggregate,
        },
    )
}

pub fn run_g3(cli: &Cli, files: &[PathBuf]) -> Result<()> {
    let mut cfg: G3Config = io::config_or_default(cli.config.as_deref())?;
    cfg.analysis.validate()?;
    let truths = files.iter().map(|f| load_truth(f)).collect::<Result<Vec<_>>>()?;
    let period = resolve_period(cfg.period_ps, &truths)?;
    cfg.period_ps = Some(period);
    cfg.mean_photon = resolve_mean_photon(&cfg.mean_photon, &truths)?;
    let binning = cfg.binning.binning(period)?;
    let provenance = Provenance::new("analyze-g3", &cfg, None, &inputs(files))?;

    let mut results = Vec::new();
    for (i, f) in files.iter().enumerate() {
        let tags = load_tags(f)?;
        let [a, b, c] = cfg.channels;
        let h = coincidence_histogram_3(&tags, a, b, c, binning)?;
        let mut w = io::create(&numbered(&cli.out, "g3_histogram", i, files.len()))?;
        h.write_csv(&mut w)?;
        let estimate = extract_g3(&h, period, &cfg.analysis)?;
        print_estimate(&format!("{}: g3", f.display()), &estimate);
        results.push(FileEstimate {
            input: f.display().to_string(),
            estimate,
            mean_photon: mean_photon(&tags, &cfg.mean_photon)?,
        });
    }
    let aggregate = aggregate(&results.iter().map(|r| r.estimate.clone()).collect::<Vec<_>>())?;
    if let Some(a) = &aggregate {
        print_estimate("aggregate g3", a);
    }
    io::write_json(
        &cli.out.join("g3.json"),
        &CorrelationOutput {
            provenance,
            results,
            aggregate,
        },
    )
}

fn g2_of(tags: &TagStream, pair: [u8; 2], binning: Binning) -> Result<Histogram1D> {
    Ok(coincidence_histogram_2(tags, pair[0], pair[1], binning)?)
}

pub fn run_csi(cli: &Cli, files: &[PathBuf]) -> Result<()> {
    let mut cfg: CsiConfig = io::config_or_default(cli.config.as_deref())?;
    cfg.analysis.validate()?;
    let truths = files.iter().map(|f| load_truth(f)).collect::<Result<Vec<_>>>()?;
    let period = resolve_period(cfg.period_ps, &truths)?;
    cfg.period_ps = Some(period);
    let binning = cfg.binning.binning(period)?;
    let provenance = Provenance::new("csi", &cfg, None, &inputs(files))?;

    let mut repetitions = Vec::new();
    for (i, f) in files.iter().enumerate() {
        let tags = load_tags(f)?;
        let mut est = Vec::new();
        for (name, pair) in [("ii", cfg.auto_i), ("jj", cfg.auto_j), ("ij", cfg.cross)] {
            let h = g2_of(&tags, pair, binning)?;
            let mut w = io::create(&numbered(&cli.out, &format!("csi_{name}_histogram"), i, files.len()))?;
            h.write_csv(&mut w)?;
            est.push(extract_g2(&h, period, &cfg.analysis)?);
        }
        let [g2_ii, g2_jj, g2_ij]: [CorrelationEstimate; 3] = est.try_into().expect("three estimates");
        let csi = csi_r(&g2_ii, &g2_jj, &g2_ij)?;
        println!("{}: R = {:.4} ± {:.4}", f.display(), csi.r, csi.std_error);
        repetitions.push(CsiRepetition {
            input: f.display().to_string(),
            correlations: CsiTriple { g2_ii, g2_jj, g2_ij },
            csi,
        });
    }
    let pick = |sel: fn(&CsiTriple) -> &CorrelationEstimate| -> Result<CorrelationEstimate> {
        let v: Vec<_> = repetitions.iter().map(|r| sel(&r.correlations).clone()).collect();
        Ok(aggregate_repetitions(&v)?)
    };
    let combined = CsiTriple {
        g2_ii: pick(|t| &t.g2_ii)?,
        g2_jj: pick(|t| &t.g2_jj)?,
        g2_ij: pick(|t| &t.g2_ij)?,
    };
    let csi = csi_r(&combined.g2_ii, &combined.g2_jj, &combined.g2_ij)?;
    println!(
        "R = {:.4} ± {:.4} ({:.1} σ above 1)",
        csi.r,
        csi.std_error,
        (csi.r - 1.0) / csi.std_error
    );
    io::write_json(
        &cli.out.join("csi.json"),
        &CsiOutput {
            provenance,
            repetitions,
            combined,
            csi,
        },
    )
}

//! Satellite-normalized zero-delay correlations and the inter-beam `R`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TagError};
use crate::fit::{gaussian_1d, gaussian_2d, PeakFit};
use crate::histogram::{Binning, Histogram1D, Histogram2D};
use crate::peaks::{local_maxima_1d, local_maxima_2d};
use crate::tags::TagStream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub min_satellites: usize,
    /// Coefficient of determination a peak fit must reach.
    pub min_r2: f64,
    pub max_satellite_cv: f64,
    /// Half-width of each peak's fit window, in laser periods.
    pub fit_half_window_periods: f64,
    /// Peak prominence over the local minimum, in Poisson standard deviations.
    pub prominence_sigma: f64,
    /// Three-fold peaks with `|k_B| < extent` or `|k_C| < extent` are not
    /// used as satellites; 0 keeps them.
    pub exclusion_extent: usize,
    pub exclude_diagonal: bool,
    /// Allowed mismatch between the period and a whole number of bins,
    /// relative to the period.
    pub period_tolerance: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            min_satellites: 10,
            min_r2: 0.9,
            max_satellite_cv: 0.15,
            fit_half_window_periods: 0.25,
            prominence_sigma: 5.0,
            exclusion_extent: 1,
            exclude_diagonal: true,
            period_tolerance: 1e-3,
        }
    }
}

impl AnalysisConfig {
    pub fn without_exclusions(self) -> Self {
        Self {
            exclusion_extent: 0,
            exclude_diagonal: false,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.min_satellites >= 2
            && (0.0..=1.0).contains(&self.min_r2)
            && self.max_satellite_cv >= 0.0
            && self.fit_half_window_periods > 0.0
            && self.fit_half_window_periods < 0.5
            && self.prominence_sigma >= 0.0
            && self.period_tolerance >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(TagError::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GaussianFit,
    PeakMax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_satellites_used: usize,
    pub satellite_cv: f64,
    /// R² of the central-peak fit.
    pub fit_r2: f64,
    pub method: Method,
    /// Raw central and mean satellite heights behind `value`.
    pub central_height: f64,
    pub satellite_mean: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsiResult {
    #[serde(rename = "R")]
    pub r: f64,
    pub std_error: f64,
    pub g2_ii: f64,
    pub g2_jj: f64,
    pub g2_ij: f64,
}

struct Geometry {
    half_period: usize,
    fit_half: usize,
    period_bins: f64,
}

fn geometry(b: &Binning, period_ps: f64, cfg: &AnalysisConfig) -> Result<Geometry> {
    cfg.validate()?;
    if !(period_ps.is_finite() && period_ps > 0.0) {
        return Err(TagError::InvalidConfig("period must be positive".into()));
    }
    let w = b.bin_width_ps as f64;
    let period_bins = period_ps / w;
    if (period_ps - period_bins.round() * w).abs() > cfg.period_tolerance * period_ps || period_bins < 2.0 {
        return Err(TagError::InvalidConfig(format!(
            "bin width {} ps does not divide the period {period_ps} ps",
            b.bin_width_ps
        )));
    }
    Ok(Geometry {
        half_period: (period_bins / 2.0).floor() as usize,
        fit_half: ((cfg.fit_half_window_periods * period_bins).round() as usize).max(1),
        period_bins,
    })
}

/// Peak index in units of the period, relative to zero delay.
fn order(idx: usize, b: &Binning, g: &Geometry) -> i64 {
    ((idx as f64 - b.half_bins as f64) / g.period_bins).round() as i64
}

struct Sat {
    fit: PeakFit,
    raw_max: f64,
}

struct Heights {
    mean: f64,
    sd: f64,
    n: usize,
}

fn stats(v: impl Iterator<Item = f64>) -> Heights {
    let v: Vec<f64> = v.collect();
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Heights { mean, sd, n }
}

fn combine(central: Option<PeakFit>, central_raw: f64, sats: &[Sat], cfg: &AnalysisConfig) -> Result<CorrelationEstimate> {
    if sats.len() < cfg.min_satellites {
        return Err(TagError::InsufficientSatellites {
            found: sats.len(),
            required: cfg.min_satellites,
        });
    }
    let fitted = stats(sats.iter().map(|s| s.fit.height));
    let cv = fitted.sd / fitted.mean;
    if cv > cfg.max_satellite_cv {
        return Err(TagError::PoorNormalization {
            cv,
            threshold: cfg.max_satellite_cv,
        });
    }
    let fit_r2 = central.map_or(0.0, |c| c.r2);
    let (method, c, c_var, sat) = match central {
        Some(f) if f.r2 >= cfg.min_r2 => (Method::GaussianFit, f.height, f.height_var, fitted),
        _ => (
            Method::PeakMax,
            central_raw,
            central_raw.max(1.0),
            stats(sats.iter().map(|s| s.raw_max)),
        ),
    };
    let value = c / sat.mean;
    let sat_rel2 = sat.sd * sat.sd / (sat.n as f64 * sat.mean * sat.mean);
    let std_error = (c_var / (sat.mean * sat.mean) + value * value * sat_rel2).sqrt();
    Ok(CorrelationEstimate {
        value,
        std_error,
        n_satellites_used: sats.len(),
        satellite_cv: cv,
        fit_r2,
        method,
        central_height: c,
        satellite_mean: sat.mean,
    })
}

fn window_1d(counts: &[u64], centre: usize, half: usize) -> Option<Vec<f64>> {
    if centre < half || centre + half >= counts.len() {
        return None;
    }
    Some(counts[centre - half..=centre + half].iter().map(|&c| c as f64).collect())
}

fn window_2d(h: &Histogram2D, row: usize, col: usize, half: usize) -> Option<Vec<f64>> {
    let n = h.side();
    if row < half || col < half || row + half >= n || col + half >= n {
        return None;
    }
    let mut out = Vec::with_capacity((2 * half + 1).pow(2));
    for r in row - half..=row + half {
        out.extend(h.counts[r * n + col - half..=r * n + col + half].iter().map(|&c| c as f64));
    }
    Some(out)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Zero-delay `g²` from a two-fold histogram, normalized to the mean
/// fitted satellite height.
pub fn extract_g2(h: &Histogram1D, period_ps: f64, cfg: &AnalysisConfig) -> Result<CorrelationEstimate> {
    let g = geometry(&h.binning, period_ps, cfg)?;
    let mut best: BTreeMap<i64, usize> = BTreeMap::new();
    for i in local_maxima_1d(&h.counts, g.half_period, cfg.prominence_sigma) {
        let k = order(i, &h.binning, &g);
        if k != 0 {
            let e = best.entry(k).or_insert(i);
            if h.counts[i] > h.counts[*e] {
                *e = i;
            }
        }
    }
    let sats: Vec<Sat> = best
        .values()
        .filter_map(|&i| {
            let y = window_1d(&h.counts, i, g.fit_half)?;
            let fit = gaussian_1d(&y, g.fit_half)?;
            (fit.r2 >= cfg.min_r2).then(|| Sat { fit, raw_max: max_of(&y) })
        })
        .collect();
    let y = window_1d(&h.counts, h.binning.half_bins, g.fit_half)
        .ok_or_else(|| TagError::InvalidConfig("histogram range too small for the central fit window".into()))?;
    combine(gaussian_1d(&y, g.fit_half), max_of(&y), &sats, cfg)
}

/// Zero-delay `g³` from a three-fold histogram. Peaks in the exclusion band
/// around either axis and on the diagonal carry same-pulse pairs and are not
/// used for normalization.
pub fn extract_g3(h: &Histogram2D, period_ps: f64, cfg: &AnalysisConfig) -> Result<CorrelationEstimate> {
    let g = geometry(&h.binning, period_ps, cfg)?;
    let side = h.side();
    let extent = cfg.exclusion_extent as i64;
    let mut best: BTreeMap<(i64, i64), (usize, usize)> = BTreeMap::new();
    for (r, c) in local_maxima_2d(&h.counts, side, g.half_period, cfg.prominence_sigma) {
        let (kr, kc) = (order(r, &h.binning, &g), order(c, &h.binning, &g));
        if (kr, kc) == (0, 0) || kr.abs() < extent || kc.abs() < extent || (cfg.exclude_diagonal && kr == kc) {
            continue;
        }
        let e = best.entry((kr, kc)).or_insert((r, c));
        if h.get(r, c) > h.get(e.0, e.1) {
            *e = (r, c);
        }
    }
    let win = 2 * g.fit_half + 1;
    let sats: Vec<Sat> = best
        .values()
        .filter_map(|&(r, c)| {
            let y = window_2d(h, r, c, g.fit_half)?;
            let fit = gaussian_2d(&y, win, g.fit_half)?;
            (fit.r2 >= cfg.min_r2).then(|| Sat { fit, raw_max: max_of(&y) })
        })
        .collect();
    let mid = h.binning.half_bins;
    let y = window_2d(h, mid, mid, g.fit_half)
        .ok_or_else(|| TagError::InvalidConfig("histogram range too small for the central fit window".into()))?;
    combine(gaussian_2d(&y, win, g.fit_half), max_of(&y), &sats, cfg)
}

/// Loss-corrected mean photon number per pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanPhotonEstimate {
    pub value: f64,
    pub std_error: f64,
    pub clicks_per_pulse: f64,
}

/// `⟨n⟩ ≈ Σ_c clicks_c / (N·η)` over the detectors behind one beam, valid
/// while each detector clicks on a small fraction of pulses.
pub fn mean_photon_number(tags: &TagStream, channels: &[u8], n_pulses: u64, eta: f64) -> Result<MeanPhotonEstimate> {
    if n_pulses == 0 || !(eta > 0.0 && eta <= 1.0) || channels.is_empty() {
        return Err(TagError::InvalidConfig("need pulses, channels and eta in (0, 1]".into()));
    }
    let clicks = tags.records.iter().filter(|r| channels.contains(&r.channel)).count() as f64;
    let n = n_pulses as f64;
    Ok(MeanPhotonEstimate {
        value: clicks / (n * eta),
        std_error: clicks.sqrt() / (n * eta),
        clicks_per_pulse: clicks / (n * channels.len() as f64),
    })
}

/// `R = (g²_ij)² / (g²_ii g²_jj)` with first-order error propagation.
pub fn csi_r(g2_ii: &CorrelationEstimate, g2_jj: &CorrelationEstimate, g2_ij: &CorrelationEstimate) -> Result<CsiResult> {
    let (ii, jj, ij) = (g2_ii.value, g2_jj.value, g2_ij.value);
    if !(ii > 0.0 && jj > 0.0 && ij >= 0.0) {
        return Err(TagError::InvalidConfig("auto-correlations must be positive".into()));
    }
    let r = ij * ij / (ii * jj);
    let var = (2.0 * ij * g2_ij.std_error / (ii * jj)).powi(2)
        + (r * g2_ii.std_error / ii).powi(2)
        + (r * g2_jj.std_error / jj).powi(2);
    Ok(CsiResult {
        r,
        std_error: var.sqrt(),
        g2_ii: ii,
        g2_jj: jj,
        g2_ij: ij,
    })
}

/// Mean over repetitions with the sample standard deviation as the error.
/// A single repetition keeps its own error.
pub fn aggregate_repetitions(estimates: &[CorrelationEstimate]) -> Result<CorrelationEstimate> {
    let n = estimates.len();
    let first = estimates
        .first()
        .ok_or_else(|| TagError::InvalidConfig("no repetitions to aggregate".into()))?;
    let mean = |f: fn(&CorrelationEstimate) -> f64| estimates.iter().map(f).sum::<f64>() / n as f64;
    let value = mean(|e| e.value);
    let std_error = if n > 1 {
        (estimates.iter().map(|e| (e.value - value).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        first.std_error
    };
    Ok(CorrelationEstimate {
        value,
        std_error,
        n_satellites_used: estimates.iter().map(|e| e.n_satellites_used).min().unwrap_or(0),
        satellite_cv: mean(|e| e.satellite_cv),
        fit_r2: estimates.iter().map(|e| e.fit_r2).fold(1.0, f64::min),
        method: if estimates.iter().all(|e| e.method == Method::GaussianFit) {
            Method::GaussianFit
        } else {
            Method::PeakMax
        },
        central_height: mean(|e| e.central_height),
        satellite_mean: mean(|e| e.satellite_mean),
    })
}

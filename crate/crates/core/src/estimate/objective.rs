use serde::{Deserialize, Serialize};

use super::curve::{model_curve, CurvePoint};
use super::regress::{fit_line, fit_power_law, Line, PowerLaw};
use crate::error::{Error, Result};
use crate::state::{HyperParams, OracleConfig};

/// One measured (or synthetic) correlation data point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSetPoint {
    pub mean_n: f64,
    pub g2: f64,
    #[serde(default)]
    pub g2_err: f64,
    pub g3: f64,
    #[serde(default)]
    pub g3_err: f64,
    #[serde(default)]
    pub intensity: Option<f64>,
}

impl DataSetPoint {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mean_n >= 0.0 && self.g2 >= 0.0 && self.g3 >= 0.0;
        if ok && self.mean_n.is_finite() && self.g2.is_finite() && self.g3.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid data point {self:?}")))
        }
    }
}

impl From<CurvePoint> for DataSetPoint {
    fn from(p: CurvePoint) -> Self {
        Self {
            mean_n: p.mean_n,
            g2: p.g2,
            g2_err: 0.0,
            g3: p.g3,
            g3_err: 0.0,
            intensity: None,
        }
    }
}

/// The two fitted summaries compared by the objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    /// `g³ = a·g² + b`
    pub g3_vs_g2: Line,
    /// `g² = c·⟨n⟩^p`
    pub g2_vs_n: PowerLaw,
}

pub fn summarize(mean_n: &[f64], g2: &[f64], g3: &[f64]) -> Result<CurveSummary> {
    let g3_vs_g2 = fit_line(g2, g3).ok_or_else(|| Error::DegenerateFit("g3 vs g2 line".into()))?;
    let g2_vs_n = fit_power_law(mean_n, g2).ok_or_else(|| Error::DegenerateFit("g2 vs <n> power law".into()))?;
    Ok(CurveSummary { g3_vs_g2, g2_vs_n })
}

fn summarize_points<'a, I: IntoIterator<Item = (f64, f64, f64)>>(pts: I) -> Result<CurveSummary> {
    let mut n = Vec::new();
    let mut g2 = Vec::new();
    let mut g3 = Vec::new();
    for (a, b, c) in pts {
        n.push(a);
        g2.push(b);
        g3.push(c);
    }
    summarize(&n, &g2, &g3)
}

/// Objective against an already evaluated model curve.
pub fn objective_against(data: &[DataSetPoint], curve: &[CurvePoint]) -> Result<f64> {
    if data.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 data points, got {}", data.len())));
    }
    for p in data {
        p.validate()?;
    }
    let exp = summarize_points(data.iter().map(|p| (p.mean_n, p.g2, p.g3)))?;
    let sim = summarize_points(curve.iter().map(|p| (p.mean_n, p.g2, p.g3)))?;
    let nf = data.len() as f64;
    let err_lin = data
        .iter()
        .map(|p| (exp.g3_vs_g2.eval(p.g2) - sim.g3_vs_g2.eval(p.g2)).powi(2))
        .sum::<f64>()
        / nf;
    let err_pow = data
        .iter()
        .map(|p| (exp.g2_vs_n.eval(p.mean_n) - sim.g2_vs_n.eval(p.mean_n)).powi(2))
        .sum::<f64>()
        / nf;
    Ok(err_lin + err_pow)
}

/// Sum of the mean squared deviations between the data's and the model's
/// fitted `g³(g²)` line and `g²(⟨n⟩)` power law, both evaluated at the
/// experimental abscissae.
pub fn objective(data: &[DataSetPoint], h: &HyperParams, cfg: &OracleConfig) -> Result<f64> {
    if data.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 data points, got {}", data.len())));
    }
    objective_against(data, &model_curve(h, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data_from(h: &HyperParams) -> Vec<DataSetPoint> {
        model_curve(h, &OracleConfig::default())
            .unwrap()
            .into_iter()
            .map(DataSetPoint::from)
            .collect()
    }

    #[test]
    fn self_consistent_data_gives_zero() {
        let cfg = OracleConfig::default();
        for h in [HyperParams::h4_optimum(), HyperParams::h5_optimum()] {
            let data = data_from(&h);
            let v = objective(&data, &h, &cfg).unwrap();
            assert!(v < 1e-12, "{v}");
        }
    }

    #[test]
    fn perturbation_increases_objective() {
        let cfg = OracleConfig::default();
        let h = HyperParams::h4_optimum();
        let data = data_from(&h);
        let base = objective(&data, &h, &cfg).unwrap();
        let off = objective(&data, &HyperParams { b: h.b + 0.1, ..h }, &cfg).unwrap();
        assert!(off > base && off > 1e-6);
    }

    #[test]
    fn role_swap_is_asymmetric() {
        let cfg = OracleConfig::default();
        let h = HyperParams::h4_optimum();
        let other = HyperParams { b: 0.6, mu: 0.3, ..h };
        let a = objective(&data_from(&h), &other, &cfg).unwrap();
        let b = objective(&data_from(&other), &h, &cfg).unwrap();
        assert!(a > 0.0 && b > 0.0);
        assert!((a - b).abs() > 1e-9 * a.max(b));
    }

    #[test]
    fn too_few_points() {
        let data = data_from(&HyperParams::h4_optimum().with_modes(2));
        let err = objective(&data, &HyperParams::h4_optimum(), &OracleConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit(_)));
    }
}

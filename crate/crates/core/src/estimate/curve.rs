use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::state::{broadband_from_moments, expand_hyperparams, HyperParams, OracleConfig};

/// One point of a model curve: the state restricted to its first `k` modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub mean_n: f64,
    pub g2: f64,
    pub g3: f64,
}

/// `(⟨n⟩, g², g³)` obtained by cumulatively including modes `1..=d`.
pub fn model_curve(h: &HyperParams, cfg: &OracleConfig) -> Result<Vec<CurvePoint>> {
    let state = expand_hyperparams(h)?;
    let moments = crate::state::all_mode_moments(&state, cfg)?;
    (1..=moments.len())
        .map(|k| {
            let b = broadband_from_moments(&moments[..k])?;
            Ok(CurvePoint {
                k,
                mean_n: b.mean_n,
                g2: b.g2,
                g3: b.g3,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{mode_moments, ModeParams};
    use num_complex::Complex64 as C64;

    #[test]
    fn single_mode_curve() {
        let h = HyperParams::new(0.5, 0.3, 0.2, 0.01, 1).unwrap();
        let c = model_curve(&h, &OracleConfig::default()).unwrap();
        assert_eq!(c.len(), 1);
        let lead = ModeParams::new(0.5 * (1.0f64 - 0.09).sqrt(), 0.0, C64::new(0.2, 0.0), 0.01).unwrap();
        let m = mode_moments(&lead, &OracleConfig::default()).unwrap();
        assert!((c[0].mean_n - m.m1).abs() < 1e-15);
        assert!((c[0].g2 - m.g2()).abs() < 1e-12);
        assert!((c[0].g3 - m.g3()).abs() < 1e-12);
    }

    #[test]
    fn prefix_property() {
        let cfg = OracleConfig::default();
        let long = model_curve(&HyperParams::h5_optimum().with_modes(20), &cfg).unwrap();
        let short = model_curve(&HyperParams::h5_optimum().with_modes(8), &cfg).unwrap();
        assert_eq!(&long[..8], &short[..]);
    }

    #[test]
    fn unsqueezed_tail_only_adds_photons() {
        // μ = 0: a single squeezed mode plus displaced/thermal ones.
        let h = HyperParams::new(0.6, 0.0, 0.0, 0.0, 6).unwrap();
        let c = model_curve(&h, &OracleConfig::default()).unwrap();
        for p in &c[1..] {
            assert_eq!((p.mean_n, p.g2, p.g3), (c[0].mean_n, c[0].g2, c[0].g3));
        }
    }

    #[test]
    fn h4_curve_shape() {
        let c = model_curve(&HyperParams::h4_optimum(), &OracleConfig::default()).unwrap();
        for w in c.windows(2) {
            assert!(w[1].mean_n > w[0].mean_n);
            assert!(w[1].g2 < w[0].g2);
        }
        assert!(c.last().unwrap().g2 > 1.0);
    }
}

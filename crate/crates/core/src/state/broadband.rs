//! Broadband correlators of independent spectral modes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracle::OracleConfig;
use super::wick::{mode_moments, wick_m1_m2};
use super::{MultimodeState, NormallyOrderedMoments};
use crate::error::{Error, Result};

/// Total mean photon number and zero-delay correlators of a multimode state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Broadband {
    pub mean_n: f64,
    pub g2: f64,
    pub g3: f64,
}

/// Combines per-mode moments into `Σ_lm ⟨a_l†a_m†a_l a_m⟩ / S1²` and the
/// three-index analogue, using independence of the modes.
pub fn broadband_from_moments(moments: &[NormallyOrderedMoments]) -> Result<Broadband> {
    let (mut s1, mut s2, mut s3, mut p2, mut p3, mut x) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for m in moments {
        s1 += m.m1;
        s2 += m.m2;
        s3 += m.m3;
        p2 += m.m1 * m.m1;
        p3 += m.m1 * m.m1 * m.m1;
        x += m.m2 * m.m1;
    }
    if s1 <= 0.0 {
        return Err(Error::DegenerateState);
    }
    let g2 = (s1 * s1 - p2 + s2) / (s1 * s1);
    let g3 = (s1 * s1 * s1 - 3.0 * s1 * p2 + 2.0 * p3 + 3.0 * (s2 * s1 - x) + s3) / (s1 * s1 * s1);
    Ok(Broadband { mean_n: s1, g2, g3 })
}

/// Per-mode moments for every mode of `s`, evaluated in parallel.
pub fn all_mode_moments(s: &MultimodeState, cfg: &OracleConfig) -> Result<Vec<NormallyOrderedMoments>> {
    s.modes().par_iter().map(|m| mode_moments(m, cfg)).collect()
}

pub fn broadband_moments(s: &MultimodeState, cfg: &OracleConfig) -> Result<Broadband> {
    broadband_from_moments(&all_mode_moments(s, cfg)?)
}

/// `S1 = Σ_k (|α_k|² + N_k)`.
pub fn mean_photon(s: &MultimodeState) -> f64 {
    s.modes().iter().map(|m| wick_m1_m2(m).0).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{apply_loss, ModeParams};
    use num_complex::Complex64 as C64;

    #[test]
    fn thermal_and_coherent_limits() {
        let cfg = OracleConfig::default();
        let b = broadband_moments(&MultimodeState::single(ModeParams::thermal(1.0)).unwrap(), &cfg).unwrap();
        assert!((b.g2 - 2.0).abs() < 1e-9);
        assert!((b.g3 - 6.0).abs() < 1e-9);
        for d in [1, 3, 10] {
            let s = MultimodeState::new(vec![ModeParams::coherent(C64::new(0.8, 0.1)); d]).unwrap();
            let b = broadband_moments(&s, &cfg).unwrap();
            assert!((b.g2 - 1.0).abs() < 1e-9);
            assert!((b.g3 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn vacuum_is_degenerate() {
        let s = MultimodeState::new(vec![ModeParams::vacuum(); 2]).unwrap();
        assert_eq!(broadband_moments(&s, &OracleConfig::default()).unwrap_err(), Error::DegenerateState);
        assert_eq!(mean_photon(&s), 0.0);
    }

    #[test]
    fn mean_photon_of_coherent() {
        let s = MultimodeState::single(ModeParams::coherent(C64::new(1.5, 0.0))).unwrap();
        assert!((mean_photon(&s) - 2.25).abs() < 1e-15);
    }

    #[test]
    fn loss_leaves_correlators_unchanged() {
        let ms = vec![
            NormallyOrderedMoments { m1: 0.3, m2: 0.4, m3: 0.9 },
            NormallyOrderedMoments { m1: 0.1, m2: 0.02, m3: 0.01 },
        ];
        let b0 = broadband_from_moments(&ms).unwrap();
        for eta in [0.9, 0.5, 0.1] {
            let lossy: Vec<_> = ms.iter().map(|m| apply_loss(m, eta).unwrap()).collect();
            let b = broadband_from_moments(&lossy).unwrap();
            assert!((b.g2 - b0.g2).abs() <= 1e-14 * b0.g2);
            assert!((b.g3 - b0.g3).abs() <= 1e-14 * b0.g3);
        }
    }
}

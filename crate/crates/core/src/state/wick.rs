//! Gaussian-moment (Wick) expressions for `⟨a†a⟩` and `⟨a†²a²⟩`.

use num_complex::Complex64 as C64;

use super::oracle::{oracle_moments, OracleConfig};
use super::{ModeParams, NormallyOrderedMoments};
use crate::error::Result;

/// Central second moments `N = ⟨δa†δa⟩` and `M = ⟨δa δa⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WickCentral {
    pub n: f64,
    pub m: C64,
}

/// Phase of `M` as a function of the squeezing phase.
///
/// With `S = exp{(ζ* a†² − ζ a²)/2}` one has `S†aS = a cosh r + e^{−iθ} a† sinh r`,
/// hence `M ∝ e^{−iθ}`; `oracle_agrees_on_complex_phase` pins this against the
/// number-basis construction.
fn anomalous_phase(theta: f64) -> f64 {
    -theta
}

pub fn wick_central(m: &ModeParams) -> WickCentral {
    let (s, c) = (m.r.sinh(), m.r.cosh());
    WickCentral {
        n: m.n_th * (2.0 * m.r).cosh() + s * s,
        m: C64::from_polar((2.0 * m.n_th + 1.0) * s * c, anomalous_phase(m.theta)),
    }
}

/// `(⟨a†a⟩, ⟨a†²a²⟩)` in closed form.
pub fn wick_m1_m2(m: &ModeParams) -> (f64, f64) {
    let WickCentral { n, m: anom } = wick_central(m);
    let a2 = m.alpha.norm_sqr();
    let m1 = a2 + n;
    let m2 = a2 * a2 + 4.0 * a2 * n + 2.0 * (m.alpha.conj().powi(2) * anom).re + 2.0 * n * n + anom.norm_sqr();
    (m1, m2)
}

/// Closed-form `m1`, `m2` with `m3` taken from the number-basis oracle.
pub fn wick_moments(m: &ModeParams, cfg: &OracleConfig) -> Result<NormallyOrderedMoments> {
    let (m1, m2) = wick_m1_m2(m);
    let m3 = oracle_moments(m, cfg)?.m3;
    Ok(NormallyOrderedMoments { m1, m2, m3 })
}

/// Per-mode moments used by the broadband combination.
pub fn mode_moments(m: &ModeParams, cfg: &OracleConfig) -> Result<NormallyOrderedMoments> {
    wick_moments(m, cfg)
}

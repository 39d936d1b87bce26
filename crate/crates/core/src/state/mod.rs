//! Single- and multimode displaced squeezed thermal states.
//!
//! Every spectral mode carries `ρ = D(α) S(ζ) ρ_th S†(ζ) D†(α)` with
//! `S(ζ) = exp{(ζ* a†² − ζ a²)/2}`, `ζ = r e^{iθ}` and `D(α) = exp(α a† − α* a)`.
//! Modes are statistically independent.

mod broadband;
mod ladder;
mod oracle;
mod schmidt;
mod wick;

pub use broadband::{all_mode_moments, broadband_from_moments, broadband_moments, mean_photon, Broadband};
pub use oracle::{density_matrix, oracle_moments, photon_number_pmf, OracleConfig};
pub use schmidt::{schmidt_number, schmidt_number_mu, squeezer_weights};
pub use wick::{mode_moments, wick_central, wick_moments, wick_m1_m2, WickCentral};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one spectral mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeParams {
    /// Squeezing magnitude.
    pub r: f64,
    /// Squeezing phase in radians.
    #[serde(default)]
    pub theta: f64,
    /// Complex displacement amplitude.
    #[serde(default = "zero_c64", with = "complex_serde")]
    pub alpha: C64,
    /// Thermal occupation of the state before squeezing and displacement.
    #[serde(default)]
    pub n_th: f64,
}

fn zero_c64() -> C64 {
    C64::new(0.0, 0.0)
}

impl ModeParams {
    pub fn new(r: f64, theta: f64, alpha: C64, n_th: f64) -> Result<Self> {
        let m = Self {
            r,
            theta,
            alpha,
            n_th,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn vacuum() -> Self {
        Self {
            r: 0.0,
            theta: 0.0,
            alpha: zero_c64(),
            n_th: 0.0,
        }
    }

    pub fn thermal(n_th: f64) -> Self {
        Self {
            n_th,
            ..Self::vacuum()
        }
    }

    pub fn coherent(alpha: C64) -> Self {
        Self {
            alpha,
            ..Self::vacuum()
        }
    }

    pub fn squeezed_vacuum(r: f64, theta: f64) -> Self {
        Self {
            r,
            theta,
            ..Self::vacuum()
        }
    }

    /// Complex squeezing parameter `ζ = r e^{iθ}`.
    pub fn zeta(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.r.is_finite()
            && self.theta.is_finite()
            && self.alpha.re.is_finite()
            && self.alpha.im.is_finite()
            && self.n_th.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("mode parameters must be finite".into()));
        }
        if self.r < 0.0 {
            return Err(Error::InvalidParameter(format!("r = {} < 0", self.r)));
        }
        if self.n_th < 0.0 {
            return Err(Error::InvalidParameter(format!("n_th = {} < 0", self.n_th)));
        }
        Ok(())
    }
}

/// Hyperparameters of the thermal squeezer distribution `r_k = B·√(1−μ²)·μ^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParams {
    #[serde(rename = "B")]
    pub b: f64,
    pub mu: f64,
    pub alpha: f64,
    pub n_th: f64,
    pub d: usize,
}

impl HyperParams {
    pub fn new(b: f64, mu: f64, alpha: f64, n_th: f64, d: usize) -> Result<Self> {
        let h = Self {
            b,
            mu,
            alpha,
            n_th,
            d,
        };
        h.validate()?;
        Ok(h)
    }

    /// Fourth-harmonic optimum.
    pub fn h4_optimum() -> Self {
        Self {
            b: 0.471,
            mu: 0.4226,
            alpha: 0.127,
            n_th: 0.001,
            d: 50,
        }
    }

    /// Fifth-harmonic optimum.
    pub fn h5_optimum() -> Self {
        Self {
            b: 0.397,
            mu: 0.32,
            alpha: 0.161,
            n_th: 0.001,
            d: 50,
        }
    }

    pub fn with_modes(self, d: usize) -> Self {
        Self { d, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.mu.is_finite() && self.alpha.is_finite() && self.n_th.is_finite()) {
            return Err(Error::InvalidParameter("hyperparameters must be finite".into()));
        }
        if !(0.0..1.0).contains(&self.mu) {
            return Err(Error::InvalidParameter(format!("mu = {} outside [0, 1)", self.mu)));
        }
        if self.b < 0.0 {
            return Err(Error::InvalidParameter(format!("B = {} < 0", self.b)));
        }
        if self.n_th < 0.0 {
            return Err(Error::InvalidParameter(format!("n_th = {} < 0", self.n_th)));
        }
        if self.d < 1 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        Ok(())
    }
}

/// Tensor product of independent spectral modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultimodeState {
    modes: Vec<ModeParams>,
}

impl MultimodeState {
    pub fn new(modes: Vec<ModeParams>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("a state needs at least one mode".into()));
        }
        for m in &modes {
            m.validate()?;
        }
        Ok(Self { modes })
    }

    pub fn single(mode: ModeParams) -> Result<Self> {
        Self::new(vec![mode])
    }

    pub fn modes(&self) -> &[ModeParams] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// The state restricted to its first `k` modes.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        Self::new(self.modes[..k.min(self.modes.len())].to_vec())
    }
}

/// Expands hyperparameters into `d` modes with `θ = 0`, real displacement
/// and thermal occupation shared by all modes.
pub fn expand_hyperparams(h: &HyperParams) -> Result<MultimodeState> {
    h.validate()?;
    let modes = squeezer_weights(h.mu, h.d)
        .into_iter()
        .map(|lambda| ModeParams {
            r: h.b * lambda,
            theta: 0.0,
            alpha: C64::new(h.alpha, 0.0),
            n_th: h.n_th,
        })
        .collect();
    MultimodeState::new(modes)
}

/// Normally ordered moments `⟨a†ⁿaⁿ⟩` for `n = 1, 2, 3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormallyOrderedMoments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl NormallyOrderedMoments {
    pub fn g2(&self) -> f64 {
        self.m2 / (self.m1 * self.m1)
    }

    pub fn g3(&self) -> f64 {
        self.m3 / (self.m1 * self.m1 * self.m1)
    }
}

/// Moments after a beam splitter of transmission `eta`.
pub fn apply_loss(m: &NormallyOrderedMoments, eta: f64) -> Result<NormallyOrderedMoments> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("transmission {eta} outside [0, 1]")));
    }
    Ok(NormallyOrderedMoments {
        m1: eta * m.m1,
        m2: eta * eta * m.m2,
        m3: eta * eta * eta * m.m3,
    })
}

/// Squeezing in decibels, `10·log₁₀(e^{2r})`.
pub fn squeezing_db(r: f64) -> f64 {
    20.0 / std::f64::consts::LN_10 * r
}

mod complex_serde {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        if z.im == 0.0 {
            Repr::Real(z.re).serialize(s)
        } else {
            Repr::Pair([z.re, z.im]).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(re) => C64::new(re, 0.0),
            Repr::Pair([re, im]) => C64::new(re, im),
        })
    }
}

//! Explicit number-basis construction of `D(α) S(ζ) ρ_th S†(ζ) D†(α)`.
//!
//! The thermal state is diagonal, so the construction reduces to pushing
//! each populated number state `|n⟩` through `S` and then `D`, both built as
//! exponentials of the truncated generators.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ladder::BandedHermitian;
use super::{ModeParams, NormallyOrderedMoments};
use crate::error::{Error, Result};

/// Thermal populations below this tail weight are not propagated.
const THERMAL_TAIL: f64 = 1e-17;

/// Adaptive truncation settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub start_dim: usize,
    /// Largest basis dimension that may be constructed.
    pub ceiling: usize,
    /// Population allowed outside the previous (half-size) basis.
    pub trace_tol: f64,
    /// Relative change allowed in each moment across a doubling.
    pub moment_rtol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            start_dim: 16,
            ceiling: 512,
            trace_tol: 1e-10,
            moment_rtol: 1e-9,
        }
    }
}

impl OracleConfig {
    pub fn with_ceiling(self, ceiling: usize) -> Self {
        Self { ceiling, ..self }
    }
}

fn thermal_populations(n_th: f64, dim: usize) -> (Vec<f64>, f64) {
    if n_th == 0.0 {
        return (vec![1.0], 0.0);
    }
    let q = n_th / (1.0 + n_th);
    let mut pops = Vec::new();
    let mut p = 1.0 / (1.0 + n_th);
    let mut tail = 1.0;
    while pops.len() < dim && tail > THERMAL_TAIL {
        pops.push(p);
        tail *= q;
        p *= q;
    }
    (pops, tail)
}

fn generators(m: &ModeParams, dim: usize) -> (BandedHermitian, BandedHermitian) {
    (
        BandedHermitian::squeezing(m.zeta(), dim),
        BandedHermitian::displacement(m.alpha, dim),
    )
}

/// Calls `f(P(n), D S |n⟩)` for every propagated thermal population.
/// Returns the thermal weight left out.
fn for_each_column(m: &ModeParams, dim: usize, mut f: impl FnMut(f64, &[C64])) -> f64 {
    let (squeeze, displace) = generators(m, dim);
    let (pops, omitted) = thermal_populations(m.n_th, dim);
    let mut v = vec![C64::new(0.0, 0.0); dim];
    for (n, &p) in pops.iter().enumerate() {
        v.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        v[n] = C64::new(1.0, 0.0);
        squeeze.exp_action(&mut v);
        displace.exp_action(&mut v);
        f(p, &v);
    }
    omitted
}

/// Diagonal of the truncated density matrix and the omitted thermal weight.
fn diagonal(m: &ModeParams, dim: usize) -> (Vec<f64>, f64) {
    let mut diag = vec![0.0; dim];
    let omitted = for_each_column(m, dim, |p, v| {
        for (d, x) in diag.iter_mut().zip(v) {
            *d += p * x.norm_sqr();
        }
    });
    (diag, omitted)
}

/// `⟨a†ᵏaᵏ⟩ = Σ_n p(n)·n!/(n−k)!`, diagonal in the number basis.
fn factorial_moments(pmf: &[f64]) -> NormallyOrderedMoments {
    let mut m = NormallyOrderedMoments {
        m1: 0.0,
        m2: 0.0,
        m3: 0.0,
    };
    for (n, &p) in pmf.iter().enumerate() {
        let n = n as f64;
        m.m1 += p * n;
        m.m2 += p * n * (n - 1.0);
        m.m3 += p * n * (n - 1.0) * (n - 2.0);
    }
    m
}

fn stable(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs())
}

struct Converged {
    pmf: Vec<f64>,
    moments: NormallyOrderedMoments,
}

fn converge(m: &ModeParams, cfg: &OracleConfig) -> Result<Converged> {
    m.validate()?;
    if cfg.start_dim < 2 {
        return Err(Error::InvalidParameter("truncation dimension must be at least 2".into()));
    }
    let mut dim = cfg.start_dim;
    if dim > cfg.ceiling {
        return Err(Error::TruncationFailure { ceiling: cfg.ceiling });
    }
    let (mut pmf, _) = diagonal(m, dim);
    let mut moments = factorial_moments(&pmf);
    loop {
        let next_dim = 2 * dim;
        if next_dim > cfg.ceiling {
            return Err(Error::TruncationFailure { ceiling: cfg.ceiling });
        }
        let (next_pmf, omitted) = diagonal(m, next_dim);
        let next = factorial_moments(&next_pmf);
        let deficit = next_pmf[dim..].iter().sum::<f64>() + omitted;
        let ok = deficit < cfg.trace_tol
            && stable(moments.m1, next.m1, cfg.moment_rtol)
            && stable(moments.m2, next.m2, cfg.moment_rtol)
            && stable(moments.m3, next.m3, cfg.moment_rtol);
        pmf = next_pmf;
        moments = next;
        dim = next_dim;
        if ok {
            return Ok(Converged { pmf, moments });
        }
    }
}

/// `tr(ρ a†ⁿaⁿ)` for `n = 1, 2, 3` from the explicit construction, doubling
/// the basis until the moments and the captured population have settled.
pub fn oracle_moments(m: &ModeParams, cfg: &OracleConfig) -> Result<NormallyOrderedMoments> {
    converge(m, cfg).map(|c| c.moments)
}

/// Photon-number distribution `p(0..=max_n)`, renormalized to unit sum.
pub fn photon_number_pmf(m: &ModeParams, max_n: usize, cfg: &OracleConfig) -> Result<Vec<f64>> {
    let mut pmf = converge(m, cfg)?.pmf;
    pmf.resize(max_n + 1, 0.0);
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    Ok(pmf)
}

/// Full density matrix in a fixed `dim`-level basis, row-major.
pub fn density_matrix(m: &ModeParams, dim: usize) -> Result<Vec<C64>> {
    m.validate()?;
    if dim < 2 {
        return Err(Error::InvalidParameter("truncation dimension must be at least 2".into()));
    }
    let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
    for_each_column(m, dim, |p, v| {
        for (i, vi) in v.iter().enumerate() {
            let row = &mut rho[i * dim..(i + 1) * dim];
            for (r, vj) in row.iter_mut().zip(v) {
                *r += p * vi * vj.conj();
            }
        }
    });
    Ok(rho)
}

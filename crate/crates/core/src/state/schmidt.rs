//! Thermal squeezer distribution and effective Schmidt number.

use crate::error::{Error, Result};

/// `λ_k = √(1−μ²)·μ^k` for `k = 0..d`.
pub fn squeezer_weights(mu: f64, d: usize) -> Vec<f64> {
    let norm = (1.0 - mu * mu).sqrt();
    let mut w = Vec::with_capacity(d);
    let mut p = 1.0;
    for _ in 0..d {
        w.push(norm * p);
        p *= mu;
    }
    w
}

/// `K = 1/Σλ_k⁴` after renormalizing the weights to `Σλ_k² = 1`.
pub fn schmidt_number(lambdas: &[f64]) -> Result<f64> {
    let s2: f64 = lambdas.iter().map(|l| l * l).sum();
    if !(s2.is_finite() && s2 > 0.0) {
        return Err(Error::InvalidParameter("mode weights cannot be normalized".into()));
    }
    let s4: f64 = lambdas.iter().map(|l| (l * l / s2).powi(2)).sum();
    Ok(1.0 / s4)
}

/// Closed form for the infinite thermal distribution, `(1+μ²)/(1−μ²)`.
pub fn schmidt_number_mu(mu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!("mu = {mu} outside [0, 1)")));
    }
    let m2 = mu * mu;
    Ok((1.0 + m2) / (1.0 - m2))
}

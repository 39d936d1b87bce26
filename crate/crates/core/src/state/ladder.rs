//! Truncated ladder-operator generators and their exponentials.
//!
//! The displacement and squeezing generators are anti-Hermitian matrices
//! `G` in a truncated number basis. We store the Hermitian `H = iG`, which
//! is banded (offsets ±1 for displacement, ±2 for squeezing), and apply
//! `exp(G) = exp(-iH)` to vectors with a Chebyshev expansion whose cost is
//! linear in the spectral radius of `H`.

use num_complex::Complex64 as C64;

/// Hermitian tridiagonal chain `H[j+1][j] = c·w_j`, `H[j][j+1] = conj(c)·w_j`.
#[derive(Clone, Debug)]
pub(crate) struct Chain {
    coef: C64,
    weights: Vec<f64>,
}

impl Chain {
    fn dim(&self) -> usize {
        self.weights.len() + 1
    }

    fn spectral_bound(&self) -> f64 {
        let w = &self.weights;
        let mut best = 0.0f64;
        for j in 0..=w.len() {
            let lower = if j > 0 { w[j - 1] } else { 0.0 };
            let upper = if j < w.len() { w[j] } else { 0.0 };
            best = best.max(lower + upper);
        }
        best * self.coef.norm()
    }

    /// `out = H v`
    #[cfg(test)]
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        let w = &self.weights;
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for j in 0..w.len() {
            out[j + 1] += self.coef * w[j] * v[j];
            out[j] += self.coef.conj() * w[j] * v[j + 1];
        }
    }

    /// `out = scale·H·cur − prev` for the real chain `|c|·w`.
    #[inline]
    fn step(w: &[f64], cur: &[C64], prev: &[C64], out: &mut [C64]) {
        let n = cur.len();
        if n == 1 {
            out[0] = -prev[0];
            return;
        }
        out[0] = cur[1] * w[0] - prev[0];
        for j in 1..n - 1 {
            out[j] = cur[j - 1] * w[j - 1] + cur[j + 1] * w[j] - prev[j];
        }
        out[n - 1] = cur[n - 2] * w[n - 2] - prev[n - 1];
    }

    /// `v ← exp(-iH) v` by Chebyshev expansion.
    ///
    /// The constant phase of the couplings is removed first with the gauge
    /// `v_j → e^{-ijφ} v_j`, which leaves a real symmetric chain.
    fn exp_action(&self, v: &mut [C64]) {
        let radius = self.spectral_bound();
        if radius == 0.0 || v.iter().all(|x| x.re == 0.0 && x.im == 0.0) {
            return;
        }
        let phi = self.coef.arg();
        let gauge: Vec<C64> = (0..v.len()).map(|j| C64::from_polar(1.0, -(j as f64) * phi)).collect();
        for (x, g) in v.iter_mut().zip(&gauge) {
            *x *= g;
        }

        let bessel = bessel_j_sequence(radius, 1e-18);
        let scale = self.coef.norm() / radius;
        let w1: Vec<f64> = self.weights.iter().map(|w| w * scale).collect();
        let w2: Vec<f64> = w1.iter().map(|w| 2.0 * w).collect();
        let dim = v.len();
        let zero = C64::new(0.0, 0.0);

        let mut prev: Vec<C64> = v.to_vec();
        let mut cur = vec![zero; dim];
        let zeros = vec![zero; dim];
        Self::step(&w1, &prev, &zeros, &mut cur);
        let mut next = vec![zero; dim];

        let mut acc: Vec<C64> = prev.iter().map(|x| x * bessel[0]).collect();
        if bessel.len() > 1 {
            add_rotated(&mut acc, &cur, 2.0 * bessel[1], 1);
        }
        for (k, jk) in bessel.iter().enumerate().skip(2) {
            // T_{k+1} = 2 x T_k − T_{k−1}
            Self::step(&w2, &cur, &prev, &mut next);
            add_rotated(&mut acc, &next, 2.0 * jk, k);
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        for ((x, a), g) in v.iter_mut().zip(&acc).zip(&gauge) {
            *x = a * g.conj();
        }
    }
}

/// `acc += c·(−i)^k·x`
#[inline]
fn add_rotated(acc: &mut [C64], x: &[C64], c: f64, k: usize) {
    match k % 4 {
        0 => acc.iter_mut().zip(x).for_each(|(a, x)| *a += x * c),
        1 => acc.iter_mut().zip(x).for_each(|(a, x)| *a += C64::new(x.im * c, -x.re * c)),
        2 => acc.iter_mut().zip(x).for_each(|(a, x)| *a -= x * c),
        _ => acc.iter_mut().zip(x).for_each(|(a, x)| *a += C64::new(-x.im * c, x.re * c)),
    }
}

/// Hermitian form `H = iG` of a single-mode generator truncated to `dim`
/// levels. Squeezing couples `n ↔ n±2` only, so it is held as two chains on
/// the even and odd sublattices.
#[derive(Clone, Debug)]
pub(crate) enum BandedHermitian {
    Displacement(Chain),
    Squeezing { even: Chain, odd: Chain, dim: usize },
}

impl BandedHermitian {
    /// `H = i(α a† − α* a)`.
    pub(crate) fn displacement(alpha: C64, dim: usize) -> Self {
        let weights = (0..dim.saturating_sub(1))
            .map(|n| ((n + 1) as f64).sqrt())
            .collect();
        Self::Displacement(Chain {
            coef: C64::i() * alpha,
            weights,
        })
    }

    /// `H = i(ζ* a†² − ζ a²)/2`.
    pub(crate) fn squeezing(zeta: C64, dim: usize) -> Self {
        let coef = C64::i() * zeta.conj() * 0.5;
        let chain = |parity: usize| Chain {
            coef,
            weights: (parity..)
                .step_by(2)
                .take_while(|n| n + 2 < dim)
                .map(|n| (((n + 1) * (n + 2)) as f64).sqrt())
                .collect(),
        };
        Self::Squeezing {
            even: chain(0),
            odd: chain(1),
            dim,
        }
    }

    /// Computes `exp(-iH) v` in place.
    pub(crate) fn exp_action(&self, v: &mut [C64]) {
        match self {
            Self::Displacement(c) => {
                debug_assert_eq!(v.len(), c.dim());
                c.exp_action(v)
            }
            Self::Squeezing { even, odd, dim } => {
                debug_assert_eq!(v.len(), *dim);
                for (parity, chain) in [(0, even), (1, odd)] {
                    let mut sub: Vec<C64> = v.iter().skip(parity).step_by(2).copied().collect();
                    if sub.is_empty() {
                        continue;
                    }
                    debug_assert_eq!(sub.len(), chain.dim());
                    chain.exp_action(&mut sub);
                    for (x, s) in v.iter_mut().skip(parity).step_by(2).zip(sub) {
                        *x = s;
                    }
                }
            }
        }
    }

    #[cfg(test)]
    fn dim(&self) -> usize {
        match self {
            Self::Displacement(c) => c.dim(),
            Self::Squeezing { dim, .. } => *dim,
        }
    }

    /// `out = H v`
    #[cfg(test)]
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        let zero = C64::new(0.0, 0.0);
        match self {
            Self::Displacement(c) => c.apply(v, out),
            Self::Squeezing { even, odd, .. } => {
                for (parity, chain) in [(0, even), (1, odd)] {
                    let sub: Vec<C64> = v.iter().skip(parity).step_by(2).copied().collect();
                    if sub.is_empty() {
                        continue;
                    }
                    let mut o = vec![zero; sub.len()];
                    chain.apply(&sub, &mut o);
                    for (x, s) in out.iter_mut().skip(parity).step_by(2).zip(o) {
                        *x = s;
                    }
                }
            }
        }
    }
}

/// Bessel functions `J_0(x), J_1(x), …` up to the order past which
/// `|J_k(x)| < tol` for all larger `k` (and `k > x`).
///
/// Miller's backward recurrence normalized by `J_0 + 2 Σ J_{2k} = 1`.
pub(crate) fn bessel_j_sequence(x: f64, tol: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return vec![1.0];
    }
    let start = (x + 25.0 * x.cbrt() + 60.0).ceil() as usize;
    let start = start + (start & 1);
    let mut j = vec![0.0f64; start + 2];
    j[start] = 1e-280;
    for k in (1..=start).rev() {
        j[k - 1] = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = j[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * j[k];
    }
    for v in j.iter_mut() {
        *v /= norm;
    }
    let mut last = 0;
    for (k, v) in j.iter().enumerate() {
        if (k as f64) <= x || v.abs() >= tol {
            last = k;
        }
    }
    j.truncate(last + 1);
    j
}

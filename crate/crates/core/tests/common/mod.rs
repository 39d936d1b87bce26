#![allow(dead_code)]

use num_complex::Complex64 as C64;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<C64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.a[i * self.n + j] = v;
    }

    /// Annihilation operator in an `n`-level number basis.
    pub fn lowering(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 1..n {
            m.set(k - 1, k, C64::new((k as f64).sqrt(), 0.0));
        }
        m
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(j, i, self.at(i, j).conj());
            }
        }
        m
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.at(i, k);
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m.a[i * n + j] += x * o.a[k * n + j];
                }
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Mat {
        Mat { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, o: &Mat) -> Mat {
        Mat { n: self.n, a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect() }
    }

    fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring of a Taylor series.
    pub fn expm(&self) -> Mat {
        let s = self.norm1().log2().ceil().max(0.0) as i32 + 1;
        let x = self.scale(C64::new(0.5f64.powi(s), 0.0));
        let mut term = Mat::identity(self.n);
        let mut sum = Mat::identity(self.n);
        for k in 1..30 {
            term = term.mul(&x).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..s {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// Leading `k×k` block.
    pub fn truncate(&self, k: usize) -> Mat {
        let mut m = Mat::zeros(k);
        for i in 0..k {
            for j in 0..k {
                m.set(i, j, self.at(i, j));
            }
        }
        m
    }

    pub fn kron(&self, o: &Mat) -> Mat {
        let n = self.n * o.n;
        let mut m = Mat::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                let x = self.at(i, j);
                for k in 0..o.n {
                    for l in 0..o.n {
                        m.a[(i * o.n + k) * n + j * o.n + l] = x * o.at(k, l);
                    }
                }
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }
}

/// `D(α) S(ζ) ρ_th S(ζ)† D(α)†` built from dense operator exponentials in a
/// `big`-level basis.
pub fn dense_mode_state(r: f64, theta: f64, alpha: C64, n_th: f64, big: usize) -> Mat {
    let a = Mat::lowering(big);
    let ad = a.dagger();
    let zeta = C64::from_polar(r, theta);
    let a2 = a.mul(&a);
    let ad2 = ad.mul(&ad);
    let gs = ad2.scale(zeta.conj() * 0.5).add(&a2.scale(-zeta * 0.5));
    let gd = ad.scale(alpha).add(&a.scale(-alpha.conj()));
    let u = gd.expm().mul(&gs.expm());
    let mut th = Mat::zeros(big);
    for k in 0..big {
        let p = if n_th == 0.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            n_th.powi(k as i32) / (1.0 + n_th).powi(k as i32 + 1)
        };
        th.set(k, k, C64::new(p, 0.0));
    }
    u.mul(&th).mul(&u.dagger())
}

/// `⟨N(N−1)⟩ / ⟨N⟩²` and `⟨N(N−1)(N−2)⟩ / ⟨N⟩³` for the total photon number
/// of a product-basis density matrix with per-mode dimension `dim`.
pub fn total_number_correlators(rho: &Mat, dim: usize, modes: usize) -> (f64, f64, f64) {
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for idx in 0..rho.n {
        let mut rest = idx;
        let mut total = 0usize;
        for _ in 0..modes {
            total += rest % dim;
            rest /= dim;
        }
        let p = rho.at(idx, idx).re;
        let n = total as f64;
        s1 += p * n;
        s2 += p * n * (n - 1.0);
        s3 += p * n * (n - 1.0) * (n - 2.0);
    }
    (s1, s2 / (s1 * s1), s3 / (s1 * s1 * s1))
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn diagonal(m: &Mat) -> Vec<f64> {
    (0..m.n).map(|i| m.at(i, i).re).collect()
}

pub fn kron_diag(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Correlators of the total photon number from a product-basis diagonal.
pub fn diag_correlators(p: &[f64], dim: usize, modes: usize) -> (f64, f64, f64) {
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for (idx, &pi) in p.iter().enumerate() {
        let (mut rest, mut total) = (idx, 0usize);
        for _ in 0..modes {
            total += rest % dim;
            rest /= dim;
        }
        let n = total as f64;
        s1 += pi * n;
        s2 += pi * n * (n - 1.0);
        s3 += pi * n * (n - 1.0) * (n - 2.0);
    }
    (s1, s2 / (s1 * s1), s3 / (s1 * s1 * s1))
}

#![allow(dead_code)]

use hhgq_timetag::{Binning, Histogram1D, Histogram2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

pub const PERIOD_PS: f64 = 1e12 / 18.66e6;
pub const JITTER_PS: f64 = 100.0;

pub fn binning_1d() -> Binning {
    Binning::covering(100, 25.0 * PERIOD_PS).unwrap()
}

pub fn binning_2d() -> Binning {
    Binning::covering(200, 4.5 * PERIOD_PS).unwrap()
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).unwrap().sample(rng) as u64
    }
}

/// Poisson-sampled pulsed two-fold histogram: satellites of integrated
/// weight `area`, central peak `g2·area`, Gaussian delay spread of two
/// jittered detectors. Bin contents use the bin-centre density.
pub fn pulsed_1d(area: f64, g2: f64, seed: u64) -> Histogram1D {
    let b = binning_1d();
    let w = b.bin_width_ps as f64;
    let s = JITTER_PS * 2f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = (0..b.n_bins())
        .map(|i| {
            let x = b.center_ps(i);
            let k = (x / PERIOD_PS).round();
            let d = x - k * PERIOD_PS;
            let weight = if k == 0.0 { g2 } else { 1.0 };
            let mean = area * weight * w * (-d * d / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
            poisson(&mut rng, mean)
        })
        .collect();
    Histogram1D::new(b, counts, 1.0).unwrap()
}

/// Poisson-sampled three-fold grid. `weight(kb, kc)` scales the peak at
/// `(kb, kc)` periods; the delay covariance is that of three detectors with
/// independent jitter sharing the reference.
pub fn pulsed_2d(area: f64, weight: impl Fn(i64, i64) -> f64, seed: u64) -> Histogram2D {
    let b = binning_2d();
    let n = b.n_bins();
    let w = b.bin_width_ps as f64;
    let v = JITTER_PS * JITTER_PS;
    let (sxx, sxy) = (2.0 * v, v);
    let det = sxx * sxx - sxy * sxy;
    let norm = w * w / (2.0 * std::f64::consts::PI * det.sqrt());
    let reach = (6.0 * sxx.sqrt() / w).ceil() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n * n];
    let h = b.half_bins as i64;
    let kmax = (b.range_ps() / PERIOD_PS).floor() as i64;
    for kb in -kmax..=kmax {
        for kc in -kmax..=kmax {
            let wt = weight(kb, kc);
            let (cb, cc) = (kb as f64 * PERIOD_PS, kc as f64 * PERIOD_PS);
            let (ib, ic) = ((cb / w).round() as i64 + h, (cc / w).round() as i64 + h);
            for r in (ib - reach).max(0)..=(ib + reach).min(n as i64 - 1) {
                for c in (ic - reach).max(0)..=(ic + reach).min(n as i64 - 1) {
                    let dx = b.center_ps(r as usize) - cb;
                    let dy = b.center_ps(c as usize) - cc;
                    let q = (sxx * dx * dx - 2.0 * sxy * dx * dy + sxx * dy * dy) / det;
                    let mean = area * wt * norm * (-0.5 * q).exp();
                    counts[r as usize * n + c as usize] += poisson(&mut rng, mean);
                }
            }
        }
    }
    Histogram2D::new(b, counts, 1.0).unwrap()
}

/// Sorted uniform tags on `[0, span)`.
pub fn uniform_tags(n: usize, span: i64, rng: &mut impl Rng) -> Vec<i64> {
    let mut t: Vec<i64> = (0..n).map(|_| rng.random_range(0..span)).collect();
    t.sort_unstable();
    t
}

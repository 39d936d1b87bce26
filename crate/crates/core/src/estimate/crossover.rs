use serde::{Deserialize, Serialize};

use super::regress::solve_spd;
use crate::error::{Error, Result};

/// Continuous two-segment power law `Y ∝ I^p_low` below the break and
/// `Y ∝ I^p_high` above it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverFit {
    pub p_low: f64,
    pub p_high: f64,
    pub break_point: f64,
    /// Yield at the break.
    pub break_yield: f64,
    /// Residual sum of squares in log-log space.
    pub rss: f64,
    /// False when both exponents agree, so the data do not locate a break.
    pub break_constrained: bool,
}

const GRID: usize = 256;

struct Segmented {
    c: f64,
    p_low: f64,
    p_high: f64,
    rss: f64,
}

fn fit_at(xs: &[f64], ys: &[f64], xb: f64) -> Option<Segmented> {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (x, y) in xs.iter().zip(ys) {
        let row = [1.0, (x - xb).min(0.0), (x - xb).max(0.0)];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * y;
        }
    }
    let [c, p_low, p_high] = solve_spd(a, b)?;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let pred = c + p_low * (x - xb).min(0.0) + p_high * (x - xb).max(0.0);
            (y - pred).powi(2)
        })
        .sum();
    Some(Segmented { c, p_low, p_high, rss })
}

fn rss_at(xs: &[f64], ys: &[f64], xb: f64) -> f64 {
    fit_at(xs, ys, xb).map_or(f64::INFINITY, |s| s.rss)
}

/// Least-squares broken power law in log-log space.
pub fn crossover_fit(intensity: &[f64], yields: &[f64]) -> Result<CrossoverFit> {
    if intensity.len() != yields.len() {
        return Err(Error::InvalidParameter("intensity and yield lengths differ".into()));
    }
    if intensity.len() < 5 {
        return Err(Error::DegenerateFit("a broken power law needs at least 5 points".into()));
    }
    if intensity.iter().chain(yields).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter("intensities and yields must be positive".into()));
    }
    let mut pts: Vec<(f64, f64)> = intensity.iter().zip(yields).map(|(i, y)| (i.ln(), y.ln())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let n = xs.len();
    // At least two points on either side of the break.
    let (lo, hi) = (xs[1], xs[n - 2]);
    if !(hi > lo) {
        return Err(Error::DegenerateFit("intensities do not span a break".into()));
    }

    let grid: Vec<f64> = (0..=GRID).map(|i| lo + (hi - lo) * i as f64 / GRID as f64).collect();
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, rss_at(&xs, &ys, x)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");

    // Golden-section refinement inside the neighbouring grid cells.
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (rss_at(&xs, &ys, c), rss_at(&xs, &ys, d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = rss_at(&xs, &ys, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = rss_at(&xs, &ys, d);
        }
    }
    let mut xb = 0.5 * (a + b);
    if rss_at(&xs, &ys, grid[best]) < rss_at(&xs, &ys, xb) {
        xb = grid[best];
    }
    let seg = fit_at(&xs, &ys, xb).ok_or_else(|| Error::DegenerateFit("singular break fit".into()))?;
    let scale = 1f64.max(seg.p_low.abs()).max(seg.p_high.abs());
    Ok(CrossoverFit {
        p_low: seg.p_low,
        p_high: seg.p_high,
        break_point: xb.exp(),
        break_yield: seg.c.exp(),
        rss: seg.rss,
        break_constrained: (seg.p_low - seg.p_high).abs() > 1e-6 * scale,
    })
}

//! Nelder–Mead simplex descent on a box, in coordinates normalized to the
//! unit cube. Points leaving the box are projected back onto it.

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Spread of objective values across the simplex.
    pub ftol: f64,
    /// Largest vertex distance from the best vertex, in unit-cube coordinates.
    pub xtol: f64,
    /// Relative size of the initial simplex.
    pub initial_step: f64,
    /// Fresh simplices built around the incumbent after convergence; guards
    /// against collapsed simplices.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            ftol: 1e-22,
            xtol: 1e-8,
            initial_step: 0.1,
            restarts: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Boxed<'a, F> {
    f: F,
    lower: &'a [f64],
    upper: &'a [f64],
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Boxed<'_, F> {
    fn to_x(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lower.iter().zip(self.upper))
            .map(|(u, (lo, hi))| lo + u.clamp(0.0, 1.0) * (hi - lo))
            .collect()
    }

    fn eval(&mut self, u: &[f64]) -> f64 {
        self.evals += 1;
        let x = self.to_x(u);
        let v = (self.f)(&x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn clamp_unit(u: &mut [f64]) {
    u.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
}

fn combine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    let mut out: Vec<f64> = a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect();
    clamp_unit(&mut out);
    out
}

fn initial_simplex(center: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut verts = vec![center.to_vec()];
    for i in 0..center.len() {
        let mut v = center.to_vec();
        v[i] = if v[i] + step <= 1.0 { v[i] + step } else { v[i] - step };
        verts.push(v);
    }
    verts
}

fn descend<F: FnMut(&[f64]) -> f64>(
    obj: &mut Boxed<'_, F>,
    start: &[f64],
    f_start: Option<f64>,
    opts: &SimplexOptions,
) -> (Vec<f64>, f64, bool) {
    let n = start.len();
    let mut verts = initial_simplex(start, opts.initial_step);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    for (i, v) in verts.iter().enumerate() {
        match (i, f_start) {
            (0, Some(f)) => vals.push(f),
            _ => vals.push(obj.eval(v)),
        }
    }
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        verts = order.iter().map(|&i| verts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let size = verts[1..]
            .iter()
            .map(|v| v.iter().zip(&verts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if vals[0].is_finite() && spread <= opts.ftol && size <= opts.xtol {
            return (verts.swap_remove(0), vals[0], true);
        }
        if obj.evals >= opts.max_evals {
            return (verts.swap_remove(0), vals[0], false);
        }

        let mut centroid = vec![0.0; n];
        for v in &verts[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = verts[n].clone();
        let reflected = combine(&centroid, &worst, -REFLECT);
        let fr = obj.eval(&reflected);
        if fr < vals[0] {
            let expanded = combine(&centroid, &worst, -EXPAND);
            let fe = obj.eval(&expanded);
            if fe < fr {
                verts[n] = expanded;
                vals[n] = fe;
            } else {
                verts[n] = reflected;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            verts[n] = reflected;
            vals[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[n] {
            let c = combine(&centroid, &reflected, CONTRACT);
            let fc = obj.eval(&c);
            (c, fc)
        } else {
            let c = combine(&centroid, &worst, CONTRACT);
            let fc = obj.eval(&c);
            (c, fc)
        };
        if fc < vals[n].min(fr) {
            verts[n] = contracted;
            vals[n] = fc;
            continue;
        }
        let best = verts[0].clone();
        for i in 1..=n {
            verts[i] = combine(&best, &verts[i], SHRINK);
            vals[i] = obj.eval(&verts[i]);
        }
    }
}

/// Minimizes `f` over the box `[lower, upper]` starting from `x0`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    assert_eq!(x0.len(), lower.len());
    assert_eq!(x0.len(), upper.len());
    let mut obj = Boxed {
        f,
        lower,
        upper,
        evals: 0,
    };
    let mut u: Vec<f64> = x0
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(x, (lo, hi))| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
        .collect();
    clamp_unit(&mut u);

    let (mut best, mut fbest, mut converged) = descend(&mut obj, &u, None, opts);
    let step = (opts.initial_step * 0.1).max(100.0 * opts.xtol);
    for _ in 0..opts.restarts {
        if !converged || obj.evals >= opts.max_evals {
            break;
        }
        let restart = SimplexOptions {
            initial_step: step,
            ..*opts
        };
        let (x, fx, conv) = descend(&mut obj, &best, Some(fbest), &restart);
        let improved = fx < fbest;
        if fx <= fbest {
            best = x;
            fbest = fx;
        }
        converged = conv;
        if !improved {
            break;
        }
    }
    SimplexResult {
        x: obj.to_x(&best),
        f: fbest,
        evals: obj.evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_interior_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &[-2.0, -2.0], &[2.0, 2.0], &SimplexOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn minimum_on_the_boundary() {
        let f = |x: &[f64]| (x[0] + 1.0).powi(2) + (x[1] - 0.3).powi(2);
        let r = minimize(f, &[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0], &SimplexOptions::default());
        assert!(r.x[0].abs() < 1e-7 && (r.x[1] - 0.3).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.123).powi(2)).sum::<f64>();
        let opts = SimplexOptions {
            max_evals: 10,
            ..Default::default()
        };
        let r = minimize(f, &[0.9; 3], &[0.0; 3], &[1.0; 3], &opts);
        assert!(!r.converged);
        assert!(r.evals <= 10 + 3);
    }
}

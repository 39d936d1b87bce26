//! Levenberg–Marquardt least squares for peak shapes, with a sandwich
//! covariance that takes the residual variance to be Poissonian.

/// Result of a least-squares fit with `P` parameters.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LsFit<const P: usize> {
    pub params: [f64; P],
    pub cov: [[f64; P]; P],
    pub r2: f64,
}

/// Cholesky solve of `a x = b`; `None` if `a` is not positive definite.
fn solve_spd<const P: usize>(a: &[[f64; P]; P], b: &[f64; P]) -> Option<[f64; P]> {
    let mut l = [[0.0; P]; P];
    for i in 0..P {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0; P];
    for i in 0..P {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; P];
    for i in (0..P).rev() {
        let mut s = y[i];
        for k in i + 1..P {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

fn invert_spd<const P: usize>(a: &[[f64; P]; P]) -> Option<[[f64; P]; P]> {
    let mut inv = [[0.0; P]; P];
    for j in 0..P {
        let mut e = [0.0; P];
        e[j] = 1.0;
        let col = solve_spd(a, &e)?;
        for i in 0..P {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Minimizes `Σ (y_i − f(i, θ))²`. `model(i, θ)` returns the value and the
/// gradient with respect to `θ`; `admissible` rejects trial steps leaving the
/// valid parameter region.
pub(crate) fn least_squares<const P: usize>(
    y: &[f64],
    init: [f64; P],
    model: impl Fn(usize, &[f64; P]) -> (f64, [f64; P]),
    admissible: impl Fn(&[f64; P]) -> bool,
) -> Option<LsFit<P>> {
    let sse = |p: &[f64; P]| -> f64 { y.iter().enumerate().map(|(i, yi)| (yi - model(i, p).0).powi(2)).sum() };
    let normal = |p: &[f64; P]| {
        let mut jtj = [[0.0; P]; P];
        let mut jtr = [0.0; P];
        for (i, yi) in y.iter().enumerate() {
            let (f, g) = model(i, p);
            let r = yi - f;
            for a in 0..P {
                jtr[a] += g[a] * r;
                for b in 0..=a {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        for a in 0..P {
            for b in a + 1..P {
                jtj[a][b] = jtj[b][a];
            }
        }
        (jtj, jtr)
    };

    let mut p = init;
    let mut cost = sse(&p);
    let mut lambda = 1e-3;
    for _ in 0..300 {
        let (jtj, jtr) = normal(&p);
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for a in 0..P {
                damped[a][a] += lambda * jtj[a][a].max(1e-12);
            }
            let Some(step) = solve_spd(&damped, &jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for a in 0..P {
                trial[a] += step[a];
            }
            let c = if admissible(&trial) { sse(&trial) } else { f64::INFINITY };
            if c < cost {
                let rel = (cost - c) / cost.max(f64::MIN_POSITIVE);
                p = trial;
                cost = c;
                lambda = (lambda / 3.0).max(1e-12);
                improved = rel > 1e-12;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }

    let (jtj, _) = normal(&p);
    let bread = invert_spd(&jtj)?;
    let mut meat = [[0.0; P]; P];
    for i in 0..y.len() {
        let (f, g) = model(i, &p);
        let v = f.max(0.0);
        for a in 0..P {
            for b in 0..P {
                meat[a][b] += v * g[a] * g[b];
            }
        }
    }
    let mut cov = [[0.0; P]; P];
    for a in 0..P {
        for b in 0..P {
            let mut s = 0.0;
            for k in 0..P {
                for l in 0..P {
                    s += bread[a][k] * meat[k][l] * bread[l][b];
                }
            }
            cov[a][b] = s;
        }
    }

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if tot > 0.0 { (1.0 - cost / tot).clamp(0.0, 1.0) } else { 0.0 };
    Some(LsFit { params: p, cov, r2 })
}

/// Peak shape fitted to a single peak, in bin units about the window centre.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PeakFit {
    pub height: f64,
    pub height_var: f64,
    pub r2: f64,
}

/// `A·exp(−(x−x0)²/2s²) + c` on samples `y[i]` at `x = i − centre`.
pub(crate) fn gaussian_1d(y: &[f64], centre: usize) -> Option<PeakFit> {
    let c0 = y.iter().copied().fold(f64::INFINITY, f64::min);
    let (imax, ymax) = y
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    if !(ymax > c0) {
        return None;
    }
    let x0 = imax as f64 - centre as f64;
    let (mut w, mut m2) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let d = i as f64 - centre as f64 - x0;
        let e = (v - c0).max(0.0);
        w += e;
        m2 += e * d * d;
    }
    let s0 = (m2 / w).sqrt().clamp(0.5, y.len() as f64 / 4.0);
    let init = [ymax - c0, x0, s0, c0];
    let half = y.len() as f64 / 2.0;
    let fit = least_squares(
        y,
        init,
        |i, p| {
            let d = i as f64 - centre as f64 - p[1];
            let s2 = p[2] * p[2];
            let e = (-d * d / (2.0 * s2)).exp();
            (p[0] * e + p[3], [e, p[0] * e * d / s2, p[0] * e * d * d / (s2 * p[2]), 1.0])
        },
        |p| p[0] > 0.0 && p[2] > 0.05 && p[1].abs() < half,
    )?;
    let c = &fit.cov;
    Some(PeakFit {
        height: fit.params[0] + fit.params[3],
        height_var: c[0][0] + 2.0 * c[0][3] + c[3][3],
        r2: fit.r2,
    })
}

/// Elliptical Gaussian `A·exp(−½(a dx² + 2b dx dy + c dy²)) + o` on a square
/// window `y[row·side + col]`, coordinates relative to `(centre, centre)`.
pub(crate) fn gaussian_2d(y: &[f64], side: usize, centre: usize) -> Option<PeakFit> {
    let o0 = y.iter().copied().fold(f64::INFINITY, f64::min);
    let (imax, ymax) = y
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    if !(ymax > o0) {
        return None;
    }
    let xy = |i: usize| ((i / side) as f64 - centre as f64, (i % side) as f64 - centre as f64);
    let (x0, y0) = xy(imax);
    let (mut w, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let (x, yy) = xy(i);
        let (dx, dy) = (x - x0, yy - y0);
        let e = (v - o0).max(0.0);
        w += e;
        sxx += e * dx * dx;
        syy += e * dy * dy;
        sxy += e * dx * dy;
    }
    let lim = side as f64 / 4.0;
    let vx = (sxx / w).clamp(0.25, lim * lim);
    let vy = (syy / w).clamp(0.25, lim * lim);
    let cxy = (sxy / w).clamp(-0.9 * (vx * vy).sqrt(), 0.9 * (vx * vy).sqrt());
    let det = vx * vy - cxy * cxy;
    let init = [ymax - o0, x0, y0, vy / det, -cxy / det, vx / det, o0];
    let half = side as f64 / 2.0;
    let fit = least_squares(
        y,
        init,
        |i, p| {
            let (x, yy) = xy(i);
            let (dx, dy) = (x - p[1], yy - p[2]);
            let q = p[3] * dx * dx + 2.0 * p[4] * dx * dy + p[5] * dy * dy;
            let e = (-0.5 * q).exp();
            let ae = p[0] * e;
            (
                ae + p[6],
                [
                    e,
                    ae * (p[3] * dx + p[4] * dy),
                    ae * (p[4] * dx + p[5] * dy),
                    -0.5 * ae * dx * dx,
                    -ae * dx * dy,
                    -0.5 * ae * dy * dy,
                    1.0,
                ],
            )
        },
        |p| p[0] > 0.0 && p[3] > 0.0 && p[5] > 0.0 && p[3] * p[5] > p[4] * p[4] && p[1].abs() < half && p[2].abs() < half,
    )?;
    let c = &fit.cov;
    Some(PeakFit {
        height: fit.params[0] + fit.params[6],
        height_var: c[0][0] + 2.0 * c[0][6] + c[6][6],
        r2: fit.r2,
    })
}

mod common;

use std::f64::consts::PI;

use common::rel;
use hhgq_core::state::{oracle_moments, wick_m1_m2, ModeParams, OracleConfig};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

fn grid() -> Vec<ModeParams> {
    let mut pts = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            for n_th in [0.0, 0.25, 0.5] {
                for theta in [0.0, PI / 2.0, PI] {
                    let r = 1.5 * i as f64 / 4.0;
                    let alpha = C64::new(2.0 * j as f64 / 4.0, 0.0);
                    pts.push(ModeParams::new(r, theta, alpha, n_th).unwrap());
                }
            }
        }
    }
    pts
}

#[test]
fn wick_matches_oracle_on_grid() {
    let cfg = OracleConfig::default().with_ceiling(4096);
    let pts = grid();
    assert_eq!(pts.len(), 225);
    let worst = pts
        .par_iter()
        .map(|p| {
            let o = oracle_moments(p, &cfg).unwrap_or_else(|e| panic!("{p:?}: {e}"));
            let (m1, m2) = wick_m1_m2(p);
            if o.m1 == 0.0 {
                assert_eq!((m1, m2), (0.0, 0.0));
                return 0.0;
            }
            rel(m1, o.m1).max(rel(m2, o.m2))
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst <= 1e-8, "worst relative error {worst:e}");
}

#[test]
fn complex_displacement_phases() {
    let cfg = OracleConfig::default();
    for phi in [0.3, 1.9, -2.4] {
        for theta in [0.0, 1.0, 2.5] {
            let p = ModeParams::new(0.5, theta, C64::from_polar(0.8, phi), 0.1).unwrap();
            let o = oracle_moments(&p, &cfg).unwrap();
            let (m1, m2) = wick_m1_m2(&p);
            assert!(rel(m1, o.m1) < 1e-8 && rel(m2, o.m2) < 1e-8, "{p:?}");
        }
    }
}

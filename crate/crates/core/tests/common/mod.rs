//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use suppdec::{DesignMatrix, SupportSet};

/// `min_b ‖y − X_U b‖²` through nalgebra's SVD least-squares solve.
pub fn lstsq_residual(design: &DesignMatrix, subset: &[usize], y: &[f64]) -> f64 {
    let n = design.n();
    let yv = DVector::from_column_slice(y);
    if subset.is_empty() {
        return yv.norm_squared();
    }
    let xu = DMatrix::from_fn(n, subset.len(), |i, j| design.get(i, subset[j]));
    let b = xu.clone().svd(true, true).solve(&yv, 1e-12).expect("svd solve");
    (yv - xu * b).norm_squared()
}

/// Every size-`s` subset with its dense-solver residual, lexicographic order.
pub fn brute_force(design: &DesignMatrix, s: usize, y: &[f64]) -> Vec<(Vec<usize>, f64)> {
    (0..design.p())
        .combinations(s)
        .map(|u| {
            let r = lstsq_residual(design, &u, y);
            (u, r)
        })
        .collect()
}

/// Argmin of [`brute_force`] with ties (relative band `tol·‖y‖²`) going to
/// the lexicographically smallest subset.
pub fn brute_force_argmin(design: &DesignMatrix, s: usize, y: &[f64], tol: f64) -> (SupportSet, f64) {
    let all = brute_force(design, s, y);
    let min = all.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let band = tol * y.iter().map(|v| v * v).sum::<f64>();
    let (u, r) = all.into_iter().find(|(_, r)| *r <= min + band).unwrap();
    (SupportSet::new(u, design.p()).unwrap(), r)
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

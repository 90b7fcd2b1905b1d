//! Least-squares residuals `f(U) = min_b ‖y − X_U b‖²`.
//!
//! Two independent routes are provided. [`residual_sq`] orthogonalises the
//! columns of `X_U` directly (modified Gram–Schmidt with one
//! re-orthogonalisation pass), which is the projection form `‖P⊥_U y‖²`.
//! [`GramCache`] stores `XᵀX`, `Xᵀy` and `‖y‖²` so that
//! `f(U) = ‖y‖² − ‖R⁻ᵀ X_Uᵀ y‖²` with `RᵀR = X_UᵀX_U` never touches `X`;
//! [`CholFactor`] maintains `R` under column insertion and deletion.

use crate::ensemble::{DesignMatrix, ObservationVector};
use crate::error::{Error, Result};

/// Relative column-norm threshold below which a direction is treated as
/// linearly dependent in the direct route.
pub const DIRECT_RANK_TOL: f64 = 1e-10;

/// Relative squared-pivot threshold for the Gram route. Normal equations lose
/// half the digits, so a dependent column shows up near `1e-16 · ‖X_j‖²`.
pub const PIVOT_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖P⊥_U y‖²` for the columns `subset` of `design`, computed by direct
/// orthogonalisation. Dependent columns are skipped, so the result is still
/// the minimum of the least-squares objective.
pub fn residual_sq(design: &DesignMatrix, subset: &[usize], y: &[f64]) -> Result<f64> {
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch {
            expected: design.n(),
            got: y.len(),
        });
    }
    if let Some(&j) = subset.iter().find(|&&j| j >= design.p()) {
        return Err(Error::Domain(format!("column {j} out of range")));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(subset.len());
    for &j in subset {
        let col = design.column(j);
        let norm0 = dot(col, col).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = col.to_vec();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= DIRECT_RANK_TOL * norm0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut r = y.to_vec();
    for _ in 0..2 {
        for q in &basis {
            let c = dot(q, &r);
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
    }
    Ok(dot(&r, &r))
}

/// Sufficient statistics of `(X, y)` for subset least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct GramCache {
    n: usize,
    p: usize,
    gram: Vec<f64>,
    xty: Vec<f64>,
    yty: f64,
}

impl GramCache {
    /// Precomputes `XᵀX`, `Xᵀy` and `‖y‖²`.
    pub fn new(design: &DesignMatrix, obs: &ObservationVector) -> Result<Self> {
        let (n, p) = (design.n(), design.p());
        if obs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: obs.len(),
            });
        }
        let mut gram = vec![0.0; p * p];
        for a in 0..p {
            let ca = design.column(a);
            for b in a..p {
                let v = dot(ca, design.column(b));
                gram[a * p + b] = v;
                gram[b * p + a] = v;
            }
        }
        let xty = (0..p).map(|j| dot(design.column(j), &obs.y)).collect();
        Ok(Self {
            n,
            p,
            gram,
            xty,
            yty: dot(&obs.y, &obs.y),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn gram(&self, a: usize, b: usize) -> f64 {
        self.gram[a * self.p + b]
    }

    pub fn gram_row(&self, a: usize) -> &[f64] {
        &self.gram[a * self.p..(a + 1) * self.p]
    }

    #[inline]
    pub fn xty(&self, j: usize) -> f64 {
        self.xty[j]
    }

    pub fn xty_all(&self) -> &[f64] {
        &self.xty
    }

    pub fn yty(&self) -> f64 {
        self.yty
    }

    /// `f(U)` from a fresh factorisation, skipping dependent columns.
    pub fn residual(&self, subset: &[usize]) -> Result<f64> {
        if let Some(&j) = subset.iter().find(|&&j| j >= self.p) {
            return Err(Error::Domain(format!("column {j} out of range")));
        }
        let mut factor = CholFactor::with_capacity(subset.len());
        for &j in subset {
            factor.push(self, j);
        }
        Ok(factor.residual(self))
    }
}

/// Upper-triangular `R` with `RᵀR = X_UᵀX_U` for an ordered column list `U`.
#[derive(Debug, Clone)]
pub struct CholFactor {
    cols: Vec<usize>,
    stride: usize,
    r: Vec<f64>,
    scratch: Vec<f64>,
}

impl CholFactor {
    pub fn with_capacity(cap: usize) -> Self {
        let stride = cap.max(1);
        Self {
            cols: Vec::with_capacity(stride),
            stride,
            r: vec![0.0; stride * stride],
            scratch: vec![0.0; stride],
        }
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn clear(&mut self) {
        self.cols.clear();
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.stride + j]
    }

    /// Appends column `j`. Returns `false`, leaving the factor unchanged, if
    /// `j` is numerically dependent on the current columns.
    pub fn push(&mut self, cache: &GramCache, j: usize) -> bool {
        let k = self.cols.len();
        if k == self.stride {
            self.grow();
        }
        let gjj = cache.gram(j, j);
        let row = cache.gram_row(j);
        let mut norm_sq = 0.0;
        for i in 0..k {
            let mut v = row[self.cols[i]];
            for l in 0..i {
                v -= self.at(l, i) * self.scratch[l];
            }
            v /= self.at(i, i);
            self.scratch[i] = v;
            norm_sq += v * v;
        }
        let d2 = gjj - norm_sq;
        if !(d2 > PIVOT_TOL * gjj) {
            return false;
        }
        let stride = self.stride;
        for i in 0..k {
            self.r[i * stride + k] = self.scratch[i];
        }
        self.r[k * stride + k] = d2.sqrt();
        self.cols.push(j);
        true
    }

    /// Deletes the column at position `pos` by Givens retriangularisation.
    /// Returns `false` if a diagonal pivot collapses, in which case the factor
    /// must be rebuilt by the caller.
    pub fn remove(&mut self, cache: &GramCache, pos: usize) -> bool {
        let k = self.cols.len();
        let stride = self.stride;
        for c in pos..k - 1 {
            for row in 0..=c + 1 {
                self.r[row * stride + c] = self.r[row * stride + c + 1];
            }
        }
        self.cols.remove(pos);
        let mut healthy = true;
        for c in pos..k - 1 {
            let a = self.r[c * stride + c];
            let b = self.r[(c + 1) * stride + c];
            let h = a.hypot(b);
            if h == 0.0 {
                healthy = false;
                continue;
            }
            let (cs, sn) = (a / h, b / h);
            self.r[c * stride + c] = h;
            self.r[(c + 1) * stride + c] = 0.0;
            for col in c + 1..k - 1 {
                let t1 = self.r[c * stride + col];
                let t2 = self.r[(c + 1) * stride + col];
                self.r[c * stride + col] = cs * t1 + sn * t2;
                self.r[(c + 1) * stride + col] = -sn * t1 + cs * t2;
            }
            let g = cache.gram(self.cols[c], self.cols[c]);
            if h * h < PIVOT_TOL * g {
                healthy = false;
            }
        }
        healthy
    }

    /// Rebuilds from scratch on `cols`, skipping dependent columns. Returns
    /// `true` if every column was kept.
    pub fn rebuild(&mut self, cache: &GramCache, cols: &[usize]) -> bool {
        self.cols.clear();
        let mut full = true;
        for &j in cols {
            full &= self.push(cache, j);
        }
        full
    }

    /// `R⁻ᵀ X_Uᵀ y`, the coordinates of `y` in the orthonormalised basis.
    pub fn projected_coords(&mut self, cache: &GramCache) -> &[f64] {
        let k = self.cols.len();
        for i in 0..k {
            let mut v = cache.xty(self.cols[i]);
            for l in 0..i {
                v -= self.at(l, i) * self.scratch[l];
            }
            self.scratch[i] = v / self.at(i, i);
        }
        &self.scratch[..k]
    }

    /// `‖y‖² − ‖R⁻ᵀ X_Uᵀ y‖²`, clamped at zero.
    pub fn residual(&mut self, cache: &GramCache) -> f64 {
        let explained: f64 = self.projected_coords(cache).iter().map(|z| z * z).sum();
        (cache.yty() - explained).max(0.0)
    }

    /// Least-squares coefficients for the current column order.
    pub fn coefficients(&mut self, cache: &GramCache) -> Vec<f64> {
        let k = self.cols.len();
        let z = self.projected_coords(cache).to_vec();
        let mut b = vec![0.0; k];
        for i in (0..k).rev() {
            let mut v = z[i];
            for l in i + 1..k {
                v -= self.at(i, l) * b[l];
            }
            b[i] = v / self.at(i, i);
        }
        b
    }

    fn grow(&mut self) {
        let old = self.stride;
        let stride = old * 2;
        let mut r = vec![0.0; stride * stride];
        for i in 0..old {
            r[i * stride..i * stride + old].copy_from_slice(&self.r[i * old..(i + 1) * old]);
        }
        self.r = r;
        self.stride = stride;
        self.scratch.resize(stride, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_design;

    fn obs(y: Vec<f64>) -> ObservationVector {
        ObservationVector { y, sigma: 1.0 }
    }

    #[test]
    fn square_invertible_fit_is_exact() {
        let x = sample_design(3, 3, 1).unwrap();
        let y = vec![0.3, -1.0, 2.0];
        assert!(residual_sq(&x, &[0, 1, 2], &y).unwrap() < 1e-24);
        let cache = GramCache::new(&x, &obs(y)).unwrap();
        assert!(cache.residual(&[0, 1, 2]).unwrap() < 1e-10);
    }

    #[test]
    fn single_column_closed_form() {
        let x = DesignMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let y = vec![2.0, 3.0];
        assert!((residual_sq(&x, &[0], &y).unwrap() - 9.0).abs() < 1e-12);
        let cache = GramCache::new(&x, &obs(y)).unwrap();
        assert!((cache.residual(&[0]).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(cache.gram(0, 0), 1.0);
        assert_eq!(cache.xty(0), 2.0);
        assert_eq!(cache.yty(), 13.0);
    }

    #[test]
    fn zero_observation_gives_zero_residual() {
        let x = sample_design(5, 4, 2).unwrap();
        let cache = GramCache::new(&x, &obs(vec![0.0; 5])).unwrap();
        for u in [[0, 1], [1, 3], [2, 3]] {
            assert_eq!(cache.residual(&u).unwrap(), 0.0);
        }
    }

    #[test]
    fn duplicate_column_is_skipped() {
        let x = DesignMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 2.0, 3.0],
        ])
        .unwrap();
        let y = vec![1.0, -2.0, 0.5, 4.0];
        let both = residual_sq(&x, &[0, 1, 2], &y).unwrap();
        let one = residual_sq(&x, &[0, 2], &y).unwrap();
        assert!((both - one).abs() < 1e-12 * (1.0 + one));
        let cache = GramCache::new(&x, &obs(y)).unwrap();
        let via_cache = cache.residual(&[0, 1, 2]).unwrap();
        assert!((via_cache - one).abs() < 1e-9 * (1.0 + one));
    }

    #[test]
    fn remove_then_push_matches_fresh_factor() {
        let x = sample_design(12, 8, 9).unwrap();
        let y: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let cache = GramCache::new(&x, &obs(y)).unwrap();
        let mut f = CholFactor::with_capacity(4);
        assert!(f.rebuild(&cache, &[5, 1, 7, 2]));
        for (pos, add) in [(1, 0), (0, 3), (3, 6), (2, 4)] {
            assert!(f.remove(&cache, pos));
            assert!(f.push(&cache, add));
            let fresh = cache.residual(f.cols()).unwrap();
            let inc = f.residual(&cache);
            assert!((fresh - inc).abs() < 1e-10 * (1.0 + fresh));
        }
        let b = f.coefficients(&cache);
        let fitted = x.mul_subset(f.cols(), &b);
        assert!(residual_sq(&x, f.cols(), &fitted).unwrap() < 1e-18);
    }

    #[test]
    fn factor_grows_past_capacity() {
        let x = sample_design(10, 6, 4).unwrap();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let cache = GramCache::new(&x, &obs(y.clone())).unwrap();
        let mut f = CholFactor::with_capacity(1);
        assert!(f.rebuild(&cache, &[0, 1, 2, 3, 4]));
        let direct = residual_sq(&x, &[0, 1, 2, 3, 4], &y).unwrap();
        assert!((f.residual(&cache) - direct).abs() < 1e-9 * (1.0 + direct));
    }
}

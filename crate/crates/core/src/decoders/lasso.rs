use std::time::Instant;

use super::{check_sizes, DecodeResult};
use crate::ensemble::SupportSet;
use crate::error::{domain, Result};
use crate::gram::GramCache;

#[derive(Debug, Clone)]
pub struct LassoOptions {
    /// Coordinate-descent stops once no coordinate moves more than this.
    pub tolerance: f64,
    /// Sweep cap per grid point.
    pub max_sweeps: usize,
    /// Coefficients above this magnitude count as selected.
    pub support_threshold: f64,
    pub grid_len: usize,
    /// Smallest grid value as a fraction of `‖Xᵀy‖∞`.
    pub grid_ratio: f64,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_sweeps: 100_000,
            support_threshold: 1e-8,
            grid_len: 50,
            grid_ratio: 1e-3,
        }
    }
}

/// Log-spaced grid from `‖Xᵀy‖∞` down to `grid_ratio · ‖Xᵀy‖∞`.
pub fn default_lambda_grid(cache: &GramCache, opts: &LassoOptions) -> Vec<f64> {
    let lmax = cache.xty_all().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if lmax == 0.0 {
        return Vec::new();
    }
    let len = opts.grid_len.max(1);
    if len == 1 {
        return vec![lmax];
    }
    let step = opts.grid_ratio.ln() / (len - 1) as f64;
    (0..len).map(|i| lmax * (step * i as f64).exp()).collect()
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Minimises `½‖y − Xβ‖² + λ‖β‖₁` by cyclic coordinate descent, starting
/// from (and overwriting) `beta`. Returns `(converged, sweeps)`.
pub fn lasso_solve(cache: &GramCache, lambda: f64, beta: &mut [f64], opts: &LassoOptions) -> (bool, usize) {
    let p = cache.p();
    // corr = Xᵀ(y − Xβ)
    let mut corr: Vec<f64> = (0..p)
        .map(|j| {
            let row = cache.gram_row(j);
            cache.xty(j) - row.iter().zip(beta.iter()).map(|(g, b)| g * b).sum::<f64>()
        })
        .collect();
    for sweep in 1..=opts.max_sweeps {
        let mut max_change = 0.0f64;
        for j in 0..p {
            let gjj = cache.gram(j, j);
            if gjj <= 0.0 {
                continue;
            }
            let old = beta[j];
            let new = soft_threshold(corr[j] + gjj * old, lambda) / gjj;
            let change = new - old;
            if change != 0.0 {
                beta[j] = new;
                for (c, g) in corr.iter_mut().zip(cache.gram_row(j)) {
                    *c -= g * change;
                }
                max_change = max_change.max(change.abs());
            }
        }
        if max_change < opts.tolerance {
            return (true, sweep);
        }
    }
    (false, opts.max_sweeps)
}

/// Lasso support estimate: walk `lambda_grid` (default: [`default_lambda_grid`])
/// with warm starts and stop at the first value whose solution has exactly
/// `s` nonzeros. If none does, keep the `s` largest coefficients at the last
/// grid point, ties to the smaller index.
pub fn decode_lasso(
    cache: &GramCache,
    s: usize,
    lambda_grid: Option<&[f64]>,
    opts: &LassoOptions,
) -> Result<DecodeResult> {
    check_sizes(cache, s)?;
    if let Some(grid) = lambda_grid {
        if grid.is_empty() {
            return domain("lambda grid must be nonempty");
        }
        if grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return domain("lambda grid values must be positive");
        }
        if grid.windows(2).any(|w| w[1] >= w[0]) {
            return domain("lambda grid must be strictly decreasing");
        }
    }
    let start = Instant::now();
    let owned;
    let grid = match lambda_grid {
        Some(g) => g,
        None => {
            owned = default_lambda_grid(cache, opts);
            &owned
        }
    };
    let p = cache.p();
    let mut beta = vec![0.0; p];
    let mut converged = true;
    let mut visited = 0u64;
    let mut chosen: Option<Vec<usize>> = None;
    for &lambda in grid {
        let (ok, _) = lasso_solve(cache, lambda, &mut beta, opts);
        converged &= ok;
        visited += 1;
        let active: Vec<usize> = (0..p).filter(|&j| beta[j].abs() > opts.support_threshold).collect();
        if active.len() == s {
            chosen = Some(active);
            break;
        }
    }
    let mut chosen = chosen.unwrap_or_else(|| {
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()).then(a.cmp(&b)));
        order.truncate(s);
        order
    });
    chosen.sort_unstable();
    let min_residual = cache.residual(&chosen)?;
    Ok(DecodeResult {
        estimate: SupportSet::from_sorted_unchecked(chosen),
        min_residual,
        tie_count: 1,
        subsets_evaluated: visited,
        elapsed: start.elapsed().as_secs_f64(),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_design, DesignMatrix, ObservationVector};

    fn scaled_identity(n: usize, scale: f64) -> DesignMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { scale } else { 0.0 }).collect())
            .collect();
        DesignMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn lambda_above_max_correlation_kills_everything() {
        let x = sample_design(20, 8, 3).unwrap();
        let y = ObservationVector { y: (0..20).map(|i| (i as f64 * 0.3).sin()).collect(), sigma: 1.0 };
        let c = GramCache::new(&x, &y).unwrap();
        let lmax = c.xty_all().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut beta = vec![0.0; 8];
        let (ok, _) = lasso_solve(&c, lmax, &mut beta, &LassoOptions::default());
        assert!(ok);
        assert!(beta.iter().all(|&b| b == 0.0));
        // KKT just below the kink: some coordinate becomes active.
        lasso_solve(&c, 0.9 * lmax, &mut beta, &LassoOptions::default());
        assert!(beta.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn orthogonal_design_is_soft_thresholding() {
        // X = 2I: solution is S(Xᵀy, λ) / 4.
        let x = scaled_identity(4, 2.0);
        let y = ObservationVector { y: vec![3.0, -1.0, 0.2, 5.0], sigma: 1.0 };
        let c = GramCache::new(&x, &y).unwrap();
        let lambda = 1.5;
        let mut beta = vec![0.0; 4];
        lasso_solve(&c, lambda, &mut beta, &LassoOptions::default());
        for j in 0..4 {
            let expected = soft_threshold(2.0 * y.y[j], lambda) / 4.0;
            assert!((beta[j] - expected).abs() < 1e-12, "{j}: {} vs {expected}", beta[j]);
        }
    }

    #[test]
    fn zero_observation_falls_back_to_smallest_indices() {
        let x = sample_design(6, 5, 1).unwrap();
        let y = ObservationVector { y: vec![0.0; 6], sigma: 0.0 };
        let c = GramCache::new(&x, &y).unwrap();
        let r = decode_lasso(&c, 3, None, &LassoOptions::default()).unwrap();
        assert_eq!(r.estimate.indices(), &[0, 1, 2]);
        let r = decode_lasso(&c, 2, Some(&[1.0, 0.5]), &LassoOptions::default()).unwrap();
        assert_eq!(r.estimate.indices(), &[0, 1]);
    }

    #[test]
    fn grid_validation() {
        let x = sample_design(6, 5, 1).unwrap();
        let y = ObservationVector { y: vec![1.0; 6], sigma: 0.0 };
        let c = GramCache::new(&x, &y).unwrap();
        let o = LassoOptions::default();
        assert!(decode_lasso(&c, 2, Some(&[]), &o).is_err());
        assert!(decode_lasso(&c, 2, Some(&[1.0, 2.0]), &o).is_err());
        assert!(decode_lasso(&c, 2, Some(&[1.0, -2.0]), &o).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let x = sample_design(6, 5, 1).unwrap();
        let y = ObservationVector { y: vec![1.0; 6], sigma: 0.0 };
        let c = GramCache::new(&x, &y).unwrap();
        let g = default_lambda_grid(&c, &LassoOptions::default());
        assert_eq!(g.len(), 50);
        assert!((g[49] / g[0] - 1e-3).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn recovers_strong_sparse_signal() {
        let x = sample_design(40, 10, 5).unwrap();
        let mut y = vec![0.0; 40];
        for i in 0..40 {
            y[i] = 3.0 * x.get(i, 2) - 3.0 * x.get(i, 7);
        }
        let c = GramCache::new(&x, &ObservationVector { y, sigma: 0.0 }).unwrap();
        let r = decode_lasso(&c, 2, None, &LassoOptions::default()).unwrap();
        assert_eq!(r.estimate.indices(), &[2, 7]);
        assert!(r.converged);
    }
}

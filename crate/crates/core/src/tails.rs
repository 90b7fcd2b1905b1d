//! Chi-square concentration bounds and binomial-coefficient bounds.
//!
//! Each tail bound is a pair `(threshold, log_prob)`: for `X` with the stated
//! law, `P[X ≥ threshold]` (upper) or `P[X ≤ threshold]` (lower) is at most
//! `exp(log_prob)`. Probabilities stay in the log domain until
//! [`TailBound::prob`] so that they can be combined with huge counts.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::combin::binomial;
use crate::error::{domain, Result};
use crate::rng::{stream_rng, trial_seed, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub threshold: f64,
    pub log_prob: f64,
}

impl TailBound {
    pub fn prob(&self) -> f64 {
        self.log_prob.exp()
    }
}

fn check(d: u64, nu: f64, x: f64) -> Result<()> {
    if d == 0 {
        return domain("degrees of freedom must be >= 1");
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return domain(format!("non-centrality must be >= 0, got {nu}"));
    }
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("deviation x must be > 0, got {x}"));
    }
    Ok(())
}

/// `P[χ²_d ≥ d + 2√(dx) + 2x] ≤ e^{−x}`.
pub fn chisq_central_upper(d: u64, x: f64) -> Result<TailBound> {
    chisq_noncentral_upper(d, 0.0, x)
}

/// `P[χ²_d ≤ d − 2√(dx)] ≤ e^{−x}`.
pub fn chisq_central_lower(d: u64, x: f64) -> Result<TailBound> {
    chisq_noncentral_lower(d, 0.0, x)
}

/// `P[χ²_d(ν) ≥ (d+ν) + 2√((d+2ν)x) + 2x] ≤ e^{−x}`.
pub fn chisq_noncentral_upper(d: u64, nu: f64, x: f64) -> Result<TailBound> {
    check(d, nu, x)?;
    let d = d as f64;
    Ok(TailBound {
        threshold: (d + nu) + 2.0 * ((d + 2.0 * nu) * x).sqrt() + 2.0 * x,
        log_prob: -x,
    })
}

/// `P[χ²_d(ν) ≤ (d+ν) − 2√((d+2ν)x)] ≤ e^{−x}`.
pub fn chisq_noncentral_lower(d: u64, nu: f64, x: f64) -> Result<TailBound> {
    check(d, nu, x)?;
    let d = d as f64;
    Ok(TailBound {
        threshold: (d + nu) - 2.0 * ((d + 2.0 * nu) * x).sqrt(),
        log_prob: -x,
    })
}

/// The deviation `x = (d+ν−t)² / (4(d+2ν))` at which the lower non-central
/// threshold reaches `t`; requires `d + ν ≥ t`.
pub fn noncentral_lower_deviation(d: u64, nu: f64, t: f64) -> Result<f64> {
    let df = d as f64;
    if df + nu < t {
        return domain("need d + nu >= t");
    }
    Ok((df + nu - t).powi(2) / (4.0 * (df + 2.0 * nu)))
}

/// Natural log of `C(m, k)`.
pub fn log_binom(m: u64, k: u64) -> Result<f64> {
    if k > m {
        return domain(format!("need k <= m, got C({m}, {k})"));
    }
    let k = k.min(m - k);
    if k <= 1000 {
        let (mf, kf) = (m as f64, k as f64);
        Ok((1..=k).map(|i| ((mf - kf + i as f64) / i as f64).ln()).sum())
    } else {
        Ok(ln_gamma(m as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((m - k) as f64 + 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomBounds {
    /// `(m/k)^k`
    pub lower: f64,
    /// `log C(m, k)`
    pub exact_log: f64,
    /// `(me/k)^k`
    pub upper: f64,
}

impl BinomBounds {
    pub fn log_lower(&self) -> f64 {
        self.lower.ln()
    }

    pub fn log_upper(&self) -> f64 {
        self.upper.ln()
    }
}

/// `(m/k)^k ≤ C(m, k) ≤ (me/k)^k`.
pub fn binom_bounds(m: u64, k: u64) -> Result<BinomBounds> {
    if k == 0 || k > m {
        return domain(format!("need 0 < k <= m, got ({m}, {k})"));
    }
    let (mf, kf) = (m as f64, k as f64);
    let log_lower = kf * (mf / kf).ln();
    Ok(BinomBounds {
        lower: log_lower.exp(),
        exact_log: log_binom(m, k)?,
        upper: (log_lower + kf).exp(),
    })
}

/// One `χ²_d(ν)` draw: `d − 1` central squares plus `(Z + √ν)²`.
pub fn sample_noncentral_chisq<R: Rng + ?Sized>(rng: &mut R, d: u64, nu: f64) -> f64 {
    let mut acc = 0.0;
    for _ in 1..d {
        let z: f64 = rng.sample(StandardNormal);
        acc += z * z;
    }
    let z: f64 = rng.sample(StandardNormal);
    acc + (z + nu.sqrt()).powi(2)
}

/// Draws `samples` variates of `χ²_d(ν)` deterministically from `seed`,
/// in parallel chunks.
pub fn sample_chisq_batch(d: u64, nu: f64, samples: usize, seed: u64) -> Vec<f64> {
    const CHUNK: usize = 1 << 14;
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(trial_seed(seed, c as u64), Stream::Noise);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).map(move |_| sample_noncentral_chisq(&mut rng, d, nu)).collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    CentralUpper,
    CentralLower,
    NoncentralUpper,
    NoncentralLower,
}

impl std::fmt::Display for TailKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::CentralUpper => "central-upper",
            Self::CentralLower => "central-lower",
            Self::NoncentralUpper => "noncentral-upper",
            Self::NoncentralLower => "noncentral-lower",
        })
    }
}

/// Outcome of one Monte Carlo domination check.
#[derive(Debug, Clone)]
pub struct TailCheck {
    pub kind: TailKind,
    pub d: u64,
    pub nu: f64,
    pub x: f64,
    pub threshold: f64,
    pub bound: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// `empirical ≤ bound + 3·stderr`.
    pub pass: bool,
    /// The 3-stderr slack exceeds 0.05, so the check is weak.
    pub wide_ci: bool,
}

pub const CHECK_DOF: [u64; 3] = [4, 16, 64];
pub const CHECK_NONCENTRALITY: [f64; 2] = [0.0, 5.0];
pub const CHECK_DEVIATION: [f64; 3] = [0.5, 2.0, 8.0];

/// Runs the domination grid: central bounds for every `(d, x)` on central
/// samples, non-central bounds for every `(d, ν, x)`. With `break_one`, the
/// first central-upper cell is checked against the lower threshold instead,
/// which must fail.
pub fn verify_tail_grid(samples: usize, seed: u64, break_one: bool) -> Result<Vec<TailCheck>> {
    if samples == 0 {
        return domain("samples must be >= 1");
    }
    let mut out = Vec::new();
    for (di, &d) in CHECK_DOF.iter().enumerate() {
        for (ni, &nu) in CHECK_NONCENTRALITY.iter().enumerate() {
            let draws = sample_chisq_batch(d, nu, samples, seed.wrapping_add((di * 8 + ni) as u64));
            let n = draws.len() as f64;
            let mut kinds = vec![TailKind::NoncentralUpper, TailKind::NoncentralLower];
            if nu == 0.0 {
                kinds.splice(0..0, [TailKind::CentralUpper, TailKind::CentralLower]);
            }
            for kind in kinds {
                for &x in &CHECK_DEVIATION {
                    let (bound, upper) = match kind {
                        TailKind::CentralUpper => (chisq_central_upper(d, x)?, true),
                        TailKind::CentralLower => (chisq_central_lower(d, x)?, false),
                        TailKind::NoncentralUpper => (chisq_noncentral_upper(d, nu, x)?, true),
                        TailKind::NoncentralLower => (chisq_noncentral_lower(d, nu, x)?, false),
                    };
                    let mut threshold = bound.threshold;
                    if break_one && out.is_empty() {
                        threshold = chisq_central_lower(d, x)?.threshold;
                    }
                    let hits = if upper {
                        draws.iter().filter(|&&v| v >= threshold).count()
                    } else {
                        draws.iter().filter(|&&v| v <= threshold).count()
                    };
                    let empirical = hits as f64 / n;
                    let stderr = (empirical * (1.0 - empirical) / n).sqrt();
                    let prob = bound.prob();
                    out.push(TailCheck {
                        kind,
                        d,
                        nu,
                        x,
                        threshold,
                        bound: prob,
                        empirical,
                        stderr,
                        pass: empirical <= prob + 3.0 * stderr,
                        wide_ci: 3.0 * (0.25 / n).sqrt() > 0.05,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `(m, k)` pairs with `1 ≤ k ≤ m ≤ max_m` violating
/// `(m/k)^k ≤ C(m, k) ≤ (me/k)^k`, checked against the exact integer.
pub fn verify_binomial_sandwich(max_m: u64) -> Vec<(u64, u64)> {
    let mut bad = Vec::new();
    for m in 1..=max_m {
        for k in 1..=m {
            let exact = binomial(m, k).expect("fits in u128") as f64;
            let b = binom_bounds(m, k).expect("valid range");
            let slack = 1e-12 * exact;
            if b.lower > exact + slack || exact > b.upper + slack {
                bad.push((m, k));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn central_upper_hand_value() {
        let b = chisq_central_upper(10, 1.0).unwrap();
        assert_relative_eq!(b.threshold, 12.0 + 2.0 * 10f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(b.threshold, 18.3246, epsilon = 1e-4);
        assert_relative_eq!(b.prob(), (-1.0f64).exp(), max_relative = 1e-15);
        assert!(chisq_central_upper(10, 0.0).is_err());
        assert!(chisq_central_upper(10, -1.0).is_err());
        assert!(chisq_central_upper(0, 1.0).is_err());
    }

    #[test]
    fn twice_dof_threshold_at_one_twelfth() {
        // x = d/12 gives d + 2√(d²/12) + d/6 ≈ 1.744 d ≤ 2d.
        for d in [1u64, 5, 60, 1000] {
            let x = d as f64 / 12.0;
            let b = chisq_central_upper(d, x).unwrap();
            assert!(b.threshold <= 2.0 * d as f64);
            assert_relative_eq!(b.log_prob, -(d as f64) / 12.0);
        }
    }

    #[test]
    fn central_lower_values() {
        let b = chisq_central_lower(4, 4.0).unwrap();
        assert_eq!(b.threshold, -4.0);
        let b = chisq_central_lower(100, 1.0).unwrap();
        assert_eq!(b.threshold, 80.0);
        assert_relative_eq!(b.prob(), (-1.0f64).exp());
    }

    #[test]
    fn noncentral_values_and_degeneracy() {
        let b = chisq_noncentral_upper(10, 5.0, 1.0).unwrap();
        assert_relative_eq!(b.threshold, 17.0 + 2.0 * 20f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(b.threshold, 25.944, epsilon = 1e-3);
        for (d, x) in [(1u64, 0.1), (7, 2.0), (64, 8.0)] {
            assert_eq!(chisq_noncentral_upper(d, 0.0, x).unwrap(), chisq_central_upper(d, x).unwrap());
            assert_eq!(chisq_noncentral_lower(d, 0.0, x).unwrap(), chisq_central_lower(d, x).unwrap());
        }
        assert_eq!(chisq_noncentral_lower(20, 0.0, 5.0).unwrap().threshold, 0.0);
        assert!(chisq_noncentral_lower(20, -1.0, 5.0).is_err());
    }

    #[test]
    fn lower_deviation_inversion() {
        for (d, nu, t) in [(10u64, 3.0, 4.0), (50, 0.0, 20.0), (5, 12.0, 17.0), (3, 1.0, 0.5)] {
            let x = noncentral_lower_deviation(d, nu, t).unwrap();
            let b = chisq_noncentral_lower(d, nu, x.max(f64::MIN_POSITIVE)).unwrap();
            assert!(b.threshold <= t + 1e-12, "{d} {nu} {t}: {}", b.threshold);
        }
        assert!(noncentral_lower_deviation(3, 1.0, 5.0).is_err());
    }

    #[test]
    fn monotone_in_x() {
        let xs = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0];
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let up = |x| chisq_noncentral_upper(16, 5.0, x).unwrap();
            let lo = |x| chisq_noncentral_lower(16, 5.0, x).unwrap();
            assert!(up(b).prob() < up(a).prob());
            assert!(up(b).threshold > up(a).threshold);
            assert!(lo(b).prob() < lo(a).prob());
            assert!(lo(b).threshold < lo(a).threshold);
        }
    }

    #[test]
    fn binom_bounds_values() {
        let b = binom_bounds(10, 3).unwrap();
        assert_relative_eq!(b.lower, 1000.0 / 27.0, max_relative = 1e-12);
        assert_relative_eq!(b.exact_log.exp(), 120.0, max_relative = 1e-12);
        assert_relative_eq!(b.upper, 743.9088, epsilon = 1e-4);
        let b = binom_bounds(7, 7).unwrap();
        assert_relative_eq!(b.lower, 1.0);
        assert_eq!(b.exact_log, 0.0);
        assert_relative_eq!(b.upper, 7f64.exp(), max_relative = 1e-12);
        assert!(binom_bounds(3, 4).is_err());
        assert!(binom_bounds(3, 0).is_err());
        assert!(verify_binomial_sandwich(40).is_empty());
    }

    #[test]
    fn log_binom_values() {
        assert_eq!(log_binom(9, 0).unwrap(), 0.0);
        assert!(log_binom(3, 4).is_err());
        for (m, k) in [(30u64, 7u64), (1_000_000, 3), (5000, 2400)] {
            assert_relative_eq!(log_binom(m, k).unwrap(), log_binom(m, m - k).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn chisq_sampler_mean() {
        let draws = sample_chisq_batch(6, 2.0, 100_000, 3);
        assert_eq!(draws.len(), 100_000);
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        // mean d + ν = 8, sd of mean = √(2(d+2ν)/N) ≈ 0.018
        assert!((mean - 8.0).abs() < 0.08, "{mean}");
        assert_eq!(draws, sample_chisq_batch(6, 2.0, 100_000, 3));
    }

    #[test]
    fn grid_negative_control_fails() {
        let checks = verify_tail_grid(20_000, 1, true).unwrap();
        assert_eq!(checks.len(), 54);
        assert!(!checks[0].pass);
        assert!(checks[1..].iter().all(|c| c.pass));
    }
}

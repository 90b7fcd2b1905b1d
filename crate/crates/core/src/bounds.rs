//! Achievability and converse quantities for exact support recovery.
//!
//! Upper side: the pairwise bound on `P[Δ(U) < 0]` for a competitor with
//! `k = |S ∖ U|` missed indices, its simplified form, and the union bound
//! `Σ_k N(k)·bound(k)` with `N(k) = C(s,k)·C(p−s,k)`.
//!
//! Lower side: Fano's bound on the restricted ensemble in which every support
//! value equals `M`, with pairwise divergences `½‖X_U v − X_V v‖²`.
//!
//! All probabilities are carried as natural logs.

use serde::Serialize;
use std::f64::consts::LN_2;

use crate::combin::binomial;
use crate::ensemble::{DesignMatrix, SupportSet};
use crate::error::{domain, Error, Result};
use crate::tails::log_binom;

/// Default constant for the sufficient sample size.
pub const DEFAULT_C: f64 = 24.0;
/// Default constant for the necessary sample size.
pub const DEFAULT_C_PRIME: f64 = 0.25;

fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `log(N − 1)` from `log N`, for `N ≥ 2`.
fn log_n_minus_one(log_n: f64) -> f64 {
    log_n + (-(-log_n).exp()).ln_1p()
}

/// `N(k) = C(s,k)·C(p−s,k)`: the number of size-`s` subsets missing exactly
/// `k` indices of a fixed size-`s` support.
pub fn overlap_count(p: usize, s: usize, k: usize) -> Result<u128> {
    if k > s || s > p {
        return domain(format!("need k <= s <= p, got p={p}, s={s}, k={k}"));
    }
    let a = binomial(s as u64, k as u64).ok_or_else(|| Error::Domain("C(s,k) overflows".into()))?;
    let b = binomial((p - s) as u64, k as u64).ok_or_else(|| Error::Domain("C(p-s,k) overflows".into()))?;
    a.checked_mul(b).ok_or_else(|| Error::Domain("N(k) overflows".into()))
}

/// `log N(k)`, `−∞` when `N(k) = 0`.
pub fn log_overlap_count(p: usize, s: usize, k: usize) -> Result<f64> {
    if k > s || s > p {
        return domain(format!("need k <= s <= p, got p={p}, s={s}, k={k}"));
    }
    if k > p - s {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_binom(s as u64, k as u64)? + log_binom((p - s) as u64, k as u64)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairwiseBound {
    /// Log of the two-term bound, possibly positive (vacuous).
    pub raw_log: f64,
    /// `min(raw_log, 0)`.
    pub log_prob: f64,
    /// The bracket `−1 + (n−s)‖β‖²/(4k)` is nonnegative.
    pub bracket_valid: bool,
}

fn check_pairwise(n: usize, s: usize, k: usize) -> Result<()> {
    if k == 0 || k > s || s >= n {
        return domain(format!("need 1 <= k <= s < n, got n={n}, s={s}, k={k}"));
    }
    Ok(())
}

/// Bound on `P[Δ(U) < 0]` for `|S ∖ U| = k`:
///
/// `exp{−(n−s)b/(12(b+4))} + 2·exp{−(k/4)[−1 + (n−s)b/(4k)]²}`, `b = ‖β*_{S∖U}‖²`.
///
/// A negative bracket is replaced by zero: the chi-square upper tail bound
/// behind the second term only covers nonnegative deviations, so that term is
/// then the trivial `2`.
pub fn pairwise_error_bound(n: usize, s: usize, k: usize, beta_norm_sq: f64) -> Result<PairwiseBound> {
    check_pairwise(n, s, k)?;
    if !(beta_norm_sq > 0.0 && beta_norm_sq.is_finite()) {
        return domain(format!("need ‖β‖² > 0, got {beta_norm_sq}"));
    }
    let (d, kf) = ((n - s) as f64, k as f64);
    let first = -d * beta_norm_sq / (12.0 * (beta_norm_sq + 4.0));
    let bracket = -1.0 + d * beta_norm_sq / (4.0 * kf);
    let second = LN_2 - kf / 4.0 * bracket.max(0.0).powi(2);
    let raw_log = log_sum_exp([first, second]);
    Ok(PairwiseBound {
        raw_log,
        log_prob: raw_log.min(0.0),
        bracket_valid: bracket >= 0.0,
    })
}

/// Whether `(n−s)M²/4 ≥ 3`, under which the simplified bound dominates the
/// two-term bound at `‖β‖² = kM²` for every `k`.
pub fn simplification_valid(n: usize, s: usize, m2: f64) -> bool {
    n > s && (n - s) as f64 * m2 / 4.0 >= 3.0
}

/// `log 3 − (n−s)kM²/(12(kM²+8))`, with the validity flag of
/// [`simplification_valid`].
pub fn simplified_pairwise_bound(n: usize, s: usize, k: usize, m2: f64) -> Result<(f64, bool)> {
    check_pairwise(n, s, k)?;
    if !(m2 > 0.0 && m2.is_finite()) {
        return domain(format!("need M² > 0, got {m2}"));
    }
    let km2 = k as f64 * m2;
    let log_bound = 3f64.ln() - (n - s) as f64 * km2 / (12.0 * (km2 + 8.0));
    Ok((log_bound, simplification_valid(n, s, m2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnionForm {
    /// Two-term pairwise bound at `‖β‖² = kM²`; valid at every `n`.
    #[default]
    ExactLemma2,
    /// `3·exp{…}`; valid under [`simplification_valid`].
    Simplified,
}

impl std::str::FromStr for UnionForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-lemma2" => Ok(Self::ExactLemma2),
            "simplified" => Ok(Self::Simplified),
            other => domain(format!(
                "unknown union form `{other}` (expected exact-lemma2 or simplified)"
            )),
        }
    }
}

impl std::fmt::Display for UnionForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ExactLemma2 => "exact-lemma2",
            Self::Simplified => "simplified",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionTerm {
    pub k: usize,
    /// `N(k)` as a float (exact below 2^53).
    pub count: f64,
    pub log_pairwise: f64,
    /// `log N(k) + log_pairwise`.
    pub log_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionBound {
    pub form: UnionForm,
    pub terms: Vec<UnionTerm>,
    /// `log Σ_k N(k)·bound(k)`.
    pub log_total: f64,
    /// `min(1, exp(log_total))`.
    pub clipped: f64,
    /// See [`simplification_valid`].
    pub regime_valid: bool,
}

/// `P[Ŝ ≠ S] ≤ Σ_{k=1}^{s} N(k)·bound(k)` with `‖β*_{S∖U}‖² = kM²`.
pub fn union_error_bound(n: usize, p: usize, s: usize, m2: f64, form: UnionForm) -> Result<UnionBound> {
    if s == 0 || s >= p || s >= n {
        return domain(format!("need 1 <= s < p and s < n, got n={n}, p={p}, s={s}"));
    }
    let mut terms = Vec::with_capacity(s);
    for k in 1..=s {
        let log_count = log_overlap_count(p, s, k)?;
        let log_pairwise = match form {
            UnionForm::ExactLemma2 => pairwise_error_bound(n, s, k, k as f64 * m2)?.raw_log,
            UnionForm::Simplified => simplified_pairwise_bound(n, s, k, m2)?.0,
        };
        let count = overlap_count(p, s, k).map_or_else(|_| log_count.exp(), |c| c as f64);
        terms.push(UnionTerm {
            k,
            count,
            log_pairwise,
            log_term: log_count + log_pairwise,
        });
    }
    let log_total = log_sum_exp(terms.iter().map(|t| t.log_term));
    Ok(UnionBound {
        form,
        terms,
        log_total,
        clipped: log_total.exp().min(1.0),
        regime_valid: simplification_valid(n, s, m2),
    })
}

fn check_threshold_args(p: usize, s: usize, m2: f64, c: f64) -> Result<()> {
    if s == 0 || s >= p {
        return domain(format!("need 1 <= s < p, got p={p}, s={s}"));
    }
    if !(m2 > 0.0 && m2.is_finite()) {
        return domain(format!("need M² > 0, got {m2}"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("constant must be > 0, got {c}"));
    }
    Ok(())
}

/// `C · max{ s·log(p/s), log(p−s)/M² }`.
pub fn sufficient_n(p: usize, s: usize, m2: f64, c: f64) -> Result<f64> {
    check_threshold_args(p, s, m2, c)?;
    let (pf, sf) = (p as f64, s as f64);
    Ok(c * (sf * (pf / sf).ln()).max((pf - sf).ln() / m2))
}

/// `[C′/(s·M²)] · s·log(p/s)`.
pub fn necessary_n(p: usize, s: usize, m2: f64, c_prime: f64) -> Result<f64> {
    check_threshold_args(p, s, m2, c_prime)?;
    let (pf, sf) = (p as f64, s as f64);
    Ok(c_prime / (sf * m2) * sf * (pf / sf).ln())
}

/// `γ(U, V) = 2M²(s − |U ∩ V|)`, the scale of `‖X_U v − X_V v‖² ~ γ·χ²_n`.
pub fn gamma_uv(s: usize, overlap: usize, m2: f64) -> Result<f64> {
    if overlap > s {
        return domain(format!("overlap {overlap} exceeds s = {s}"));
    }
    Ok(2.0 * m2 * (s - overlap) as f64)
}

/// `½‖X_U v − X_V v‖²` with `v = M·1_s`: the divergence between the
/// restricted-ensemble hypotheses `U` and `V` for the realised design.
pub fn kl_pairwise(design: &DesignMatrix, u: &SupportSet, v: &SupportSet, magnitude: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if u.indices().iter().chain(v.indices()).any(|&j| j >= design.p()) {
        return domain("subset index out of range");
    }
    let mut diff = vec![0.0; design.n()];
    for j in u.difference(v) {
        diff.iter_mut().zip(design.column(j)).for_each(|(d, x)| *d += x);
    }
    for j in v.difference(u) {
        diff.iter_mut().zip(design.column(j)).for_each(|(d, x)| *d -= x);
    }
    Ok(0.5 * magnitude * magnitude * diff.iter().map(|d| d * d).sum::<f64>())
}

/// All size-`s` subsets of `0..p` in lexicographic order.
pub fn all_subsets(p: usize, s: usize) -> Vec<SupportSet> {
    let mut out = Vec::new();
    if s == 0 || s > p {
        return out;
    }
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        out.push(SupportSet::from_sorted_unchecked(idx.clone()));
        let Some(i) = (0..s).rev().find(|&i| idx[i] != i + p - s) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..s {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// Dense `N × N` divergence matrix over all `N = C(p, s)` restricted
/// hypotheses, row-major, rows in lexicographic subset order.
pub fn kl_matrix(design: &DesignMatrix, s: usize, magnitude: f64) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let subsets = all_subsets(design.p(), s);
    if subsets.is_empty() {
        return domain(format!("need 1 <= s <= p, got s={s}"));
    }
    let rows: Vec<Vec<f64>> = subsets
        .par_iter()
        .map(|u| {
            subsets
                .iter()
                .map(|v| kl_pairwise(design, u, v, magnitude))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

fn fano_from_average(avg_kl: f64, log_n: f64) -> f64 {
    1.0 - (avg_kl + LN_2) / log_n_minus_one(log_n)
}

/// Fano's bound `1 − [(1/N²)Σ_{ij} D_ij + log 2] / log(N − 1)` for a row-major
/// `N × N` divergence matrix. Never exceeds 1; may be negative.
pub fn fano_bound_exact(kl: &[f64], n_hyp: usize) -> Result<f64> {
    if n_hyp < 3 {
        return domain(format!("Fano bound needs N >= 3, got {n_hyp}"));
    }
    if kl.len() != n_hyp * n_hyp {
        return Err(Error::DimensionMismatch {
            expected: n_hyp * n_hyp,
            got: kl.len(),
        });
    }
    if kl.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return domain("divergences must be finite and nonnegative");
    }
    if (0..n_hyp).any(|i| kl[i * n_hyp + i] != 0.0) {
        return domain("divergence matrix must have a zero diagonal");
    }
    // fixed summation order
    let total: f64 = kl.iter().sum();
    let nf = n_hyp as f64;
    Ok(fano_from_average(total / (nf * nf), nf.ln()))
}

/// `(1/N²)Σ_{U,V} ‖X_U v − X_V v‖²` over all `N = C(p, s)` subset pairs with
/// `v = M·1`, in closed form from column sums and the Gram total.
///
/// With `m_U = M·Σ_{j∈U} X_j`, the pair average is `2(mean ‖m_U‖² − ‖mean m_U‖²)`;
/// both means reduce to `Σ_j X_j` and `Σ_j ‖X_j‖²` by symmetry over subsets.
pub fn restricted_pair_average(design: &DesignMatrix, s: usize, magnitude: f64) -> Result<f64> {
    let (n, p) = (design.n(), design.p());
    if s == 0 || s > p {
        return domain(format!("need 1 <= s <= p, got s={s}, p={p}"));
    }
    let (pf, sf) = (p as f64, s as f64);
    let mut col_sum = vec![0.0; n];
    let mut sq_sum = 0.0;
    for j in 0..p {
        let c = design.column(j);
        col_sum.iter_mut().zip(c).for_each(|(a, x)| *a += x);
        sq_sum += c.iter().map(|x| x * x).sum::<f64>();
    }
    let total_sq: f64 = col_sum.iter().map(|x| x * x).sum();
    // P[j ∈ U] = s/p, P[j, l ∈ U] = s(s−1)/(p(p−1))
    let pair = if p > 1 { sf * (sf - 1.0) / (pf * (pf - 1.0)) } else { 0.0 };
    let single = sf / pf;
    let mean_norm_sq = single * sq_sum + pair * (total_sq - sq_sum);
    let mean_vec_sq = single * single * total_sq;
    Ok(2.0 * magnitude * magnitude * (mean_norm_sq - mean_vec_sq))
}

/// Fano's bound on the restricted ensemble for the realised design: the
/// average divergence is half of [`restricted_pair_average`].
pub fn fano_bound_restricted(design: &DesignMatrix, s: usize, magnitude: f64) -> Result<f64> {
    let log_n = log_binom(design.p() as u64, s as u64)?;
    if log_n < 3f64.ln() - 1e-12 {
        return domain("Fano bound needs C(p, s) >= 3");
    }
    Ok(fano_from_average(0.5 * restricted_pair_average(design, s, magnitude)?, log_n))
}

/// `1 − (4M²sn + log 2)/log(N − 1)` with `N = C(p, s)`. Holds for at least
/// half of the design realisations (Markov on the pair average), not for
/// every design.
pub fn fano_bound_ensemble(n: usize, p: usize, s: usize, m2: f64) -> Result<f64> {
    if s == 0 || s > p {
        return domain(format!("need 1 <= s <= p, got p={p}, s={s}"));
    }
    let log_n = log_binom(p as u64, s as u64)?;
    if log_n < 3f64.ln() - 1e-12 {
        return domain("Fano bound needs C(p, s) >= 3");
    }
    Ok(1.0 - (4.0 * m2 * s as f64 * n as f64 + LN_2) / log_n_minus_one(log_n))
}

/// Markov threshold `4M²sn` with `P[Z ≥ threshold] ≤ 1/2` for the pair
/// average `Z` of [`restricted_pair_average`].
pub fn markov_z_tail(n: usize, s: usize, m2: f64) -> (f64, f64) {
    (4.0 * m2 * s as f64 * n as f64, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundOptions {
    pub c: f64,
    pub c_prime: f64,
    pub union_form: UnionForm,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            c_prime: DEFAULT_C_PRIME,
            union_form: UnionForm::default(),
        }
    }
}

/// Every theoretical quantity for one `(n, p, s, M²)` point, `M²` in
/// noise-normalised units. Quantities whose preconditions fail are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub m2: f64,
    pub union: Option<UnionBound>,
    pub sufficient_n: Option<f64>,
    pub necessary_n: Option<f64>,
    pub fano_exact: Option<f64>,
    pub fano_ensemble: Option<f64>,
    pub regime_valid: bool,
}

impl BoundReport {
    pub fn compute(n: usize, p: usize, s: usize, m2: f64, opts: &BoundOptions, fano_exact: Option<f64>) -> Result<Self> {
        if n == 0 || s == 0 || s > p {
            return domain(format!("need n >= 1 and 1 <= s <= p, got n={n}, p={p}, s={s}"));
        }
        if !(m2 > 0.0 && m2.is_finite()) {
            return domain(format!("need M² > 0, got {m2}"));
        }
        Ok(Self {
            n,
            p,
            s,
            m2,
            union: union_error_bound(n, p, s, m2, opts.union_form).ok(),
            sufficient_n: sufficient_n(p, s, m2, opts.c).ok(),
            necessary_n: necessary_n(p, s, m2, opts.c_prime).ok(),
            fano_exact,
            fano_ensemble: fano_bound_ensemble(n, p, s, m2).ok(),
            regime_valid: simplification_valid(n, s, m2),
        })
    }
}

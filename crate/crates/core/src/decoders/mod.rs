//! Support decoders.
//!
//! [`decode_exhaustive`] is the optimal decoder: it returns the size-`s`
//! subset with the smallest least-squares residual. [`decode_omp`] and
//! [`decode_lasso`] are tractable baselines for comparison runs.

mod delta;
mod exhaustive;
mod lasso;
mod omp;

pub use delta::{delta_statistic, PairwiseStatistic};
pub use exhaustive::{decode_exhaustive, ExhaustiveOptions, DEFAULT_BUDGET, DEFAULT_TIE_TOLERANCE};
pub use lasso::{decode_lasso, default_lambda_grid, lasso_solve, LassoOptions};
pub use omp::decode_omp;

use crate::ensemble::SupportSet;
use crate::error::{domain, Error, Result};
use crate::gram::GramCache;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub estimate: SupportSet,
    /// `f(estimate)`.
    pub min_residual: f64,
    /// Subsets whose residual lies within tolerance of the minimum
    /// (always 1 for the greedy and Lasso decoders).
    pub tie_count: u64,
    /// Subsets scored by the exhaustive decoder; greedy steps for OMP;
    /// grid points visited for the Lasso.
    pub subsets_evaluated: u64,
    /// Wall time in seconds.
    pub elapsed: f64,
    /// `false` if the Lasso hit its sweep cap at some grid point.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderKind {
    Exhaustive,
    Omp,
    Lasso,
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "omp" => Ok(Self::Omp),
            "lasso" => Ok(Self::Lasso),
            other => domain(format!(
                "unknown decoder `{other}` (expected exhaustive, omp or lasso)"
            )),
        }
    }
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exhaustive => "exhaustive",
            Self::Omp => "omp",
            Self::Lasso => "lasso",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct DecodeOptions {
    pub exhaustive: ExhaustiveOptions,
    pub lasso: LassoOptions,
}

/// Runs the decoder named by `kind`.
pub fn decode(kind: DecoderKind, cache: &GramCache, s: usize, opts: &DecodeOptions) -> Result<DecodeResult> {
    match kind {
        DecoderKind::Exhaustive => decode_exhaustive(cache, s, &opts.exhaustive),
        DecoderKind::Omp => decode_omp(cache, s),
        DecoderKind::Lasso => decode_lasso(cache, s, None, &opts.lasso),
    }
}

fn check_sizes(cache: &GramCache, s: usize) -> Result<()> {
    if s == 0 || s > cache.p() {
        return domain(format!("need 1 <= s <= p, got s={s}, p={}", cache.p()));
    }
    Ok(())
}

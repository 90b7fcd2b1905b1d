use std::time::Instant;

use super::{check_sizes, DecodeResult};
use crate::combin::{binomial, RevolvingDoor};
use crate::ensemble::SupportSet;
use crate::error::{Error, Result};
use crate::gram::{CholFactor, GramCache};

pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_BUDGET: f64 = 1e8;

// Rebuild the factor from scratch this often to cap drift along the chain.
const REFRESH_EVERY: u64 = 1 << 14;
// Near-tie candidates kept in memory before falling back to a second pass.
const TIE_BUFFER: usize = 4096;

#[derive(Debug, Clone)]
pub struct ExhaustiveOptions {
    /// Residuals within `tolerance · ‖y‖²` of the minimum are ties.
    pub tolerance: f64,
    /// Largest `C(p, s)` the decoder will enumerate.
    pub budget: f64,
}

impl Default for ExhaustiveOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TIE_TOLERANCE,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Calls `visit(f(U), U)` for every `s`-subset `U`, in revolving-door order.
/// Each step updates the Cholesky factor of `X_UᵀX_U` by one column deletion
/// and one insertion.
fn for_each_residual(cache: &GramCache, s: usize, mut visit: impl FnMut(f64, &[usize])) -> u64 {
    let mut door = RevolvingDoor::new(cache.p(), s);
    let mut factor = CholFactor::with_capacity(s);
    let mut clean = factor.rebuild(cache, door.current());
    let mut evaluated = 0u64;
    loop {
        visit(factor.residual(cache), door.current());
        evaluated += 1;
        let Some((out, inn)) = door.next_swap() else {
            break;
        };
        if clean && !evaluated.is_multiple_of(REFRESH_EVERY) {
            let pos = factor
                .cols()
                .iter()
                .position(|&c| c == out)
                .expect("outgoing column is in the factor");
            clean = factor.remove(cache, pos) && factor.push(cache, inn);
        } else {
            clean = false;
        }
        if !clean {
            clean = factor.rebuild(cache, door.current());
        }
    }
    evaluated
}

struct TieTracker {
    band: f64,
    best: f64,
    candidates: Vec<(f64, Vec<usize>)>,
    overflow: bool,
}

impl TieTracker {
    fn offer(&mut self, f: f64, subset: &[usize]) {
        if f < self.best {
            self.best = f;
            let cut = f + self.band;
            self.candidates.retain(|(g, _)| *g <= cut);
        }
        if f <= self.best + self.band && !self.overflow {
            if self.candidates.len() == TIE_BUFFER {
                self.overflow = true;
                self.candidates.clear();
            } else {
                self.candidates.push((f, subset.to_vec()));
            }
        }
    }
}

/// The optimal decoder: `argmin_{|U| = s} f(U)` over all `C(p, s)` subsets.
///
/// Ties within `tolerance · ‖y‖²` of the minimum go to the lexicographically
/// smallest index sequence. Refuses with [`Error::Budget`] when `C(p, s)`
/// exceeds `opts.budget`.
pub fn decode_exhaustive(cache: &GramCache, s: usize, opts: &ExhaustiveOptions) -> Result<DecodeResult> {
    check_sizes(cache, s)?;
    let p = cache.p();
    let count = binomial(p as u64, s as u64).map_or(f64::INFINITY, |c| c as f64);
    if count > opts.budget {
        return Err(Error::Budget {
            p,
            s,
            count,
            budget: opts.budget,
        });
    }
    let start = Instant::now();
    let mut tracker = TieTracker {
        band: opts.tolerance * cache.yty(),
        best: f64::INFINITY,
        candidates: Vec::new(),
        overflow: false,
    };
    let evaluated = for_each_residual(cache, s, |f, u| tracker.offer(f, u));
    let best = tracker.best;
    let cut = best + tracker.band;

    let (estimate, tie_count) = if tracker.overflow {
        let mut lex_min: Option<Vec<usize>> = None;
        let mut ties = 0u64;
        for_each_residual(cache, s, |f, u| {
            if f <= cut {
                ties += 1;
                if lex_min.as_deref().is_none_or(|m| u < m) {
                    lex_min = Some(u.to_vec());
                }
            }
        });
        (lex_min.expect("at least one subset attains the minimum"), ties)
    } else {
        let ties = tracker.candidates.len() as u64;
        let lex_min = tracker
            .candidates
            .into_iter()
            .map(|(_, u)| u)
            .min()
            .expect("at least one subset attains the minimum");
        (lex_min, ties)
    };

    Ok(DecodeResult {
        estimate: SupportSet::from_sorted_unchecked(estimate),
        min_residual: best,
        tie_count,
        subsets_evaluated: evaluated,
        elapsed: start.elapsed().as_secs_f64(),
        converged: true,
    })
}

use std::time::Instant;

use super::{check_sizes, DecodeResult};
use crate::ensemble::SupportSet;
use crate::error::Result;
use crate::gram::{CholFactor, GramCache};

/// Orthogonal matching pursuit on the Gram cache.
///
/// Each step adds the unselected column with the largest normalised absolute
/// correlation `|X_jᵀr| / ‖X_j‖` with the current least-squares residual `r`,
/// then refits. Ties go to the smallest index.
pub fn decode_omp(cache: &GramCache, s: usize) -> Result<DecodeResult> {
    check_sizes(cache, s)?;
    let start = Instant::now();
    let p = cache.p();
    let mut factor = CholFactor::with_capacity(s);
    let mut excluded = vec![false; p];
    let mut steps = 0u64;

    while factor.len() < s {
        let coef = factor.coefficients(cache);
        let mut best: Option<(usize, f64)> = None;
        for j in (0..p).filter(|&j| !excluded[j]) {
            let gjj = cache.gram(j, j);
            if gjj <= 0.0 {
                continue;
            }
            let row = cache.gram_row(j);
            let fitted: f64 = factor.cols().iter().zip(&coef).map(|(&i, b)| row[i] * b).sum();
            let score = (cache.xty(j) - fitted).abs() / gjj.sqrt();
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, _)) = best else { break };
        excluded[j] = true;
        factor.push(cache, j);
        steps += 1;
    }

    let mut chosen = factor.cols().to_vec();
    // Degenerate designs can leave fewer than s independent columns.
    for j in 0..p {
        if chosen.len() == s {
            break;
        }
        if !chosen.contains(&j) {
            chosen.push(j);
        }
    }
    chosen.sort_unstable();
    let min_residual = cache.residual(&chosen)?;
    Ok(DecodeResult {
        estimate: SupportSet::from_sorted_unchecked(chosen),
        min_residual,
        tie_count: 1,
        subsets_evaluated: steps,
        elapsed: start.elapsed().as_secs_f64(),
        converged: true,
    })
}

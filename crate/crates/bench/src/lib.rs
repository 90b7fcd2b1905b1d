//! Fixtures shared by the benchmarks.

use suppdec::ensemble::{observe, sample_design, sample_signal};
use suppdec::{GramCache, SignMode};

/// Gram cache of a noisy random instance.
pub fn instance(n: usize, p: usize, s: usize, seed: u64) -> GramCache {
    let x = sample_design(n, p, seed).expect("valid sizes");
    let beta = sample_signal(p, s, 0.5, SignMode::RandomSign, seed).expect("valid sizes");
    let obs = observe(&x, &beta, 1.0, seed).expect("matching dimensions");
    GramCache::new(&x, &obs).expect("matching dimensions")
}

/// Exhaustive search that refactorises every subset from scratch; the
/// baseline the incremental decoder is measured against.
pub fn fresh_factorisation_argmin(cache: &GramCache, s: usize) -> (Vec<usize>, f64) {
    let p = cache.p();
    let mut idx: Vec<usize> = (0..s).collect();
    let mut best = (idx.clone(), f64::INFINITY);
    loop {
        let r = cache.residual(&idx).expect("valid subset");
        if r < best.1 {
            best = (idx.clone(), r);
        }
        // next combination in lexicographic order
        let Some(i) = (0..s).rev().find(|&i| idx[i] < p - s + i) else {
            return best;
        };
        idx[i] += 1;
        for j in i + 1..s {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

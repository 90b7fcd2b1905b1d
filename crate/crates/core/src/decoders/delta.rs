use crate::ensemble::{DesignMatrix, ObservationVector, SparseSignal, SupportSet};
use crate::error::{domain, Error, Result};
use crate::gram::residual_sq;

/// The pairwise statistic `Δ(U) = f(U) − f(S)`; the optimal decoder prefers
/// `U` over the true support `S` exactly when `Δ(U) < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseStatistic {
    pub delta: f64,
    pub subset: SupportSet,
    /// `k = |S ∖ U|`.
    pub overlap_complement: usize,
}

/// Evaluates `Δ(U)` in projection form:
/// `‖P⊥_U (X_{S∖U} β*_{S∖U} + W)‖² − ‖P⊥_S W‖²` with `W = y − Xβ*`.
pub fn delta_statistic(
    design: &DesignMatrix,
    obs: &ObservationVector,
    beta: &SparseSignal,
    subset: &SupportSet,
) -> Result<PairwiseStatistic> {
    let s = beta.s();
    if subset.len() != s {
        return domain(format!("|U| = {} but |S| = {s}", subset.len()));
    }
    if obs.len() != design.n() {
        return Err(Error::DimensionMismatch {
            expected: design.n(),
            got: obs.len(),
        });
    }
    let support = beta.support();
    let missed = support.difference(subset);
    let k = missed.len();
    if k == 0 {
        return Ok(PairwiseStatistic {
            delta: 0.0,
            subset: subset.clone(),
            overlap_complement: 0,
        });
    }
    let clean = design.mul_sparse(beta)?;
    let noise: Vec<f64> = obs.y.iter().zip(&clean).map(|(y, m)| y - m).collect();

    let missed_coef: Vec<f64> = beta
        .iter()
        .filter(|(j, _)| missed.contains(j))
        .map(|(_, v)| v)
        .collect();
    let mut shifted = design.mul_subset(&missed, &missed_coef);
    for (v, w) in shifted.iter_mut().zip(&noise) {
        *v += w;
    }
    let f_u = residual_sq(design, subset.indices(), &shifted)?;
    let f_s = residual_sq(design, support.indices(), &noise)?;
    Ok(PairwiseStatistic {
        delta: f_u - f_s,
        subset: subset.clone(),
        overlap_complement: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{observe, sample_design, sample_signal, SignMode};

    #[test]
    fn identical_subset_is_zero() {
        let x = sample_design(8, 5, 1).unwrap();
        let b = sample_signal(5, 2, 1.0, SignMode::RandomSign, 1).unwrap();
        let y = observe(&x, &b, 1.0, 1).unwrap();
        let d = delta_statistic(&x, &y, &b, b.support()).unwrap();
        assert_eq!(d.delta, 0.0);
        assert_eq!(d.overlap_complement, 0);
    }

    #[test]
    fn noiseless_separation() {
        let mut checked = 0;
        for seed in 0..100 {
            let x = sample_design(6, 7, seed).unwrap();
            let b = sample_signal(7, 3, 0.5, SignMode::RandomSign, seed).unwrap();
            let y = observe(&x, &b, 0.0, seed).unwrap();
            // one competitor per instance: swap the first support index out
            let mut u: Vec<usize> = b.support().indices()[1..].to_vec();
            let fill = (0..7).find(|j| !b.support().contains(*j)).unwrap();
            u.push(fill);
            let u = SupportSet::from_unsorted(u, 7).unwrap();
            let d = delta_statistic(&x, &y, &b, &u).unwrap();
            assert!(d.delta > 0.0, "seed {seed}: {}", d.delta);
            assert_eq!(d.overlap_complement, 1);
            checked += 1;
        }
        assert_eq!(checked, 100);
    }

    #[test]
    fn wrong_size_rejected() {
        let x = sample_design(8, 5, 1).unwrap();
        let b = sample_signal(5, 2, 1.0, SignMode::RandomSign, 1).unwrap();
        let y = observe(&x, &b, 1.0, 1).unwrap();
        let u = SupportSet::new(vec![0, 1, 2], 5).unwrap();
        assert!(delta_statistic(&x, &y, &b, &u).is_err());
    }
}

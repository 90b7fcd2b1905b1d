use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Ensemble, ExperimentConfig};
use super::stats::{wilson_interval, WILSON_Z95};
use crate::bounds::{fano_bound_restricted, BoundReport};
use crate::decoders::{decode, DecodeOptions, DecoderKind, ExhaustiveOptions};
use crate::ensemble::{observe, sample_design, sample_signal, DesignMatrix, ObservationVector, SparseSignal, SupportSet};
use crate::error::{domain, Result};
use crate::gram::GramCache;
use crate::rng::{trial_seed, FIXED_DESIGN_TRIAL};

/// One generated problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub design: DesignMatrix,
    pub signal: SparseSignal,
    pub obs: ObservationVector,
    /// Trial seed keying the design, signal and noise streams.
    pub seed: u64,
}

impl Instance {
    /// Draws trial `trial_index` of `cfg` at sample size `n`. `fixed` replaces
    /// the per-trial design (restricted ensemble).
    pub fn generate(cfg: &ExperimentConfig, n: usize, trial_index: u64, fixed: Option<&DesignMatrix>) -> Result<Self> {
        let seed = trial_seed(cfg.base_seed, trial_index);
        let design = match fixed {
            Some(x) => x.clone(),
            None => sample_design(n, cfg.p, seed)?,
        };
        let signal = sample_signal(cfg.p, cfg.s, cfg.magnitude(), cfg.sign_mode_effective(), seed)?;
        let obs = observe(&design, &signal, cfg.sigma, seed)?;
        Ok(Self {
            design,
            signal,
            obs,
            seed,
        })
    }
}

/// The shared design of a restricted-ensemble batch.
pub fn fixed_design(cfg: &ExperimentConfig, n: usize) -> Result<Option<DesignMatrix>> {
    match cfg.ensemble {
        Ensemble::Generic => Ok(None),
        Ensemble::Restricted => sample_design(n, cfg.p, trial_seed(cfg.base_seed, FIXED_DESIGN_TRIAL)).map(Some),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub truth: SupportSet,
    pub estimate: Option<SupportSet>,
    /// Exact support recovery.
    pub success: bool,
    /// Decode time in seconds.
    pub elapsed: f64,
    pub converged: bool,
    /// Why the trial was not decoded (e.g. enumeration budget).
    pub aborted: Option<String>,
}

fn decode_options(cfg: &ExperimentConfig) -> DecodeOptions {
    DecodeOptions {
        exhaustive: ExhaustiveOptions {
            budget: cfg.budget,
            ..ExhaustiveOptions::default()
        },
        ..DecodeOptions::default()
    }
}

fn decode_instance(inst: &Instance, trial_index: u64, kind: DecoderKind, opts: &DecodeOptions) -> Result<TrialOutcome> {
    let start = Instant::now();
    let cache = GramCache::new(&inst.design, &inst.obs)?;
    let truth = inst.signal.support().clone();
    let (estimate, converged, aborted) = match decode(kind, &cache, truth.len(), opts) {
        Ok(r) => (Some(r.estimate), r.converged, None),
        Err(e) => (None, true, Some(e.to_string())),
    };
    Ok(TrialOutcome {
        trial_index,
        seed: inst.seed,
        decoder: kind,
        success: estimate.as_ref() == Some(&truth),
        truth,
        estimate,
        elapsed: start.elapsed().as_secs_f64(),
        converged,
        aborted,
    })
}

/// Generates and decodes a single trial.
pub fn run_trial(cfg: &ExperimentConfig, n: usize, trial_index: u64, decoder: DecoderKind) -> Result<TrialOutcome> {
    cfg.validate()?;
    let fixed = fixed_design(cfg, n)?;
    let inst = Instance::generate(cfg, n, trial_index, fixed.as_ref())?;
    decode_instance(&inst, trial_index, decoder, &decode_options(cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialBatchResult {
    pub experiment_id: String,
    pub p: usize,
    pub s: usize,
    pub n: usize,
    pub sigma: f64,
    pub m2: f64,
    pub decoder: String,
    pub ensemble: String,
    pub base_seed: u64,
    pub trials: usize,
    pub errors: usize,
    pub aborted: usize,
    pub nonconverged: usize,
    /// `errors / (trials − aborted)`; `None` if every trial aborted.
    pub perr_hat: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub trial_seeds: Vec<u64>,
    pub mean_decode_ms: f64,
    pub bounds: Option<BoundReport>,
}

impl TrialBatchResult {
    /// Aggregates outcomes in the order given.
    pub fn from_outcomes(cfg: &ExperimentConfig, n: usize, decoder: DecoderKind, outcomes: &[TrialOutcome], bounds: Option<BoundReport>) -> Self {
        let aborted = outcomes.iter().filter(|o| o.aborted.is_some()).count();
        let decoded = outcomes.len() - aborted;
        let errors = outcomes.iter().filter(|o| o.aborted.is_none() && !o.success).count();
        let ci = wilson_interval(errors, decoded, WILSON_Z95);
        let mean_decode_ms = if outcomes.is_empty() {
            0.0
        } else {
            1e3 * outcomes.iter().map(|o| o.elapsed).sum::<f64>() / outcomes.len() as f64
        };
        Self {
            experiment_id: cfg.experiment_id(),
            p: cfg.p,
            s: cfg.s,
            n,
            sigma: cfg.sigma,
            m2: cfg.m2,
            decoder: decoder.to_string(),
            ensemble: cfg.ensemble.to_string(),
            base_seed: cfg.base_seed,
            trials: outcomes.len(),
            errors,
            aborted,
            nonconverged: outcomes.iter().filter(|o| !o.converged).count(),
            perr_hat: (decoded > 0).then(|| errors as f64 / decoded as f64),
            ci_lo: ci.map(|c| c.0),
            ci_hi: ci.map(|c| c.1),
            trial_seeds: outcomes.iter().map(|o| o.seed).collect(),
            mean_decode_ms,
            bounds,
        }
    }

    /// Standard error of `perr_hat`.
    pub fn stderr(&self) -> Option<f64> {
        let decoded = (self.trials - self.aborted) as f64;
        self.perr_hat.map(|p| (p * (1.0 - p) / decoded).sqrt())
    }
}

fn bound_report(cfg: &ExperimentConfig, n: usize, fixed: Option<&DesignMatrix>) -> Option<BoundReport> {
    let m2 = cfg.normalized_m2()?;
    let fano_exact = fixed.and_then(|x| fano_bound_restricted(x, cfg.s, m2.sqrt()).ok());
    BoundReport::compute(n, cfg.p, cfg.s, m2, &cfg.bounds, fano_exact).ok()
}

/// Runs `cfg.trials` trials at sample size `n`; every decoder in
/// `cfg.decoders` sees the same instances. One result per decoder.
pub fn run_batch(cfg: &ExperimentConfig, n: usize) -> Result<Vec<TrialBatchResult>> {
    cfg.validate()?;
    let fixed = fixed_design(cfg, n)?;
    let opts = decode_options(cfg);
    let per_trial: Vec<Vec<TrialOutcome>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let inst = Instance::generate(cfg, n, t, fixed.as_ref())?;
            cfg.decoders
                .iter()
                .map(|&kind| decode_instance(&inst, t, kind, &opts))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let bounds = bound_report(cfg, n, fixed.as_ref());
    Ok(cfg
        .decoders
        .iter()
        .enumerate()
        .map(|(d, &kind)| {
            let outcomes: Vec<TrialOutcome> = per_trial.iter().map(|row| row[d].clone()).collect();
            TrialBatchResult::from_outcomes(cfg, n, kind, &outcomes, bounds.clone())
        })
        .collect())
}

/// Error probability estimate for a single-`n`, single-decoder config.
pub fn estimate_error(cfg: &ExperimentConfig) -> Result<TrialBatchResult> {
    if cfg.n_grid.len() != 1 || cfg.decoders.len() != 1 {
        return domain("estimate_error needs exactly one n and one decoder");
    }
    Ok(run_batch(cfg, cfg.n_grid[0])?.remove(0))
}

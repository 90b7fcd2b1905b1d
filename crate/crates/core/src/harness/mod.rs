//! Monte Carlo experiments: trials, batches with Wilson intervals, sweeps
//! over the sample size, presets and CSV/JSON output.

mod batch;
mod config;
mod preset;
mod stats;
mod sweep;

pub use batch::{estimate_error, fixed_design, run_batch, run_trial, Instance, TrialBatchResult, TrialOutcome};
pub use config::{Ensemble, ExperimentConfig};
pub use preset::{preset, PRESET_NAMES};
pub use stats::{wilson_interval, WILSON_Z95};
pub use sweep::{sweep, sweep_to_path, PhaseCurve, PhaseRow, SweepOptions, SweepSummary, CSV_HEADER};

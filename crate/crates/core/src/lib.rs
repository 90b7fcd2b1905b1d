//! Exhaustive sparsity-pattern recovery for the Gaussian linear model.
//!
//! The crate is organised around the objects a recovery experiment needs:
//!
//! * [`ensemble`]: design matrices, sparse signals and noisy observations,
//!   all drawn from seeded counter-based streams.
//! * [`gram`]: the least-squares residual `f(U)` and the Gram cache that the
//!   decoders consume.
//! * [`decoders`]: the optimal exhaustive decoder plus OMP and Lasso baselines.
//! * [`tails`] and [`bounds`]: chi-square concentration bounds, union-bound
//!   achievability and Fano converse quantities.
//! * [`harness`]: Monte Carlo batches, sweeps and CSV/JSON persistence.

pub mod bounds;
pub mod combin;
pub mod decoders;
pub mod ensemble;
pub mod error;
pub mod gram;
pub mod harness;
pub mod rng;
pub mod tails;

pub use decoders::{DecodeResult, PairwiseStatistic};
pub use ensemble::{DesignMatrix, ObservationVector, SignMode, SparseSignal, SupportSet};
pub use error::{Error, Result};
pub use gram::GramCache;

/// Version string written into JSON summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

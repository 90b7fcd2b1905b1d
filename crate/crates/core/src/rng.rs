//! Seed schedule for reproducible experiments.
//!
//! Every random draw is addressed by `(experiment seed, trial index, stream)`.
//! The experiment seed and trial index are mixed into a 64-bit trial seed,
//! which keys a ChaCha20 generator; the stream tag selects the ChaCha stream
//! (nonce). ChaCha is counter-based, so the draws for one trial never depend
//! on how many other trials ran before it or on which thread.
//!
//! Normals are drawn with the ziggurat sampler of `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Which part of a problem instance a generator feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Design = 1,
    Signal = 2,
    Noise = 3,
}

/// Trial index reserved for the shared design of fixed-design experiments.
pub const FIXED_DESIGN_TRIAL: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The per-trial seed recorded in batch results.
pub fn trial_seed(experiment_seed: u64, trial_index: u64) -> u64 {
    splitmix64(experiment_seed ^ splitmix64(trial_index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Generator for one stream of one seed.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Generator for one stream of one trial.
pub fn trial_rng(experiment_seed: u64, trial_index: u64, stream: Stream) -> ChaCha20Rng {
    stream_rng(trial_seed(experiment_seed, trial_index), stream)
}

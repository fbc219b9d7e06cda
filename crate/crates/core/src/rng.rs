//! Deterministic seed derivation.
//!
//! Every trial owns an independent ChaCha8 stream. Its 64-bit seed is derived
//! from the master seed and the trial coordinates with the SplitMix64 finalizer,
//! so the stream depends only on *which* trial it is, never on the worker
//! that happens to execute it. `ChaCha8Rng::seed_from_u64` expands the 64-bit
//! seed to a full 256-bit key with PCG32, as documented by `rand_core`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tag for the stream that draws in-interval scenario values.
pub const STREAM_GRID: u64 = 0x6772_6964;
/// Domain tag for the stream that drives a link trial.
pub const STREAM_TRIAL: u64 = 0x7472_6961;

/// SplitMix64 output function (Steele, Lea & Flood).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into `master` one word at a time.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

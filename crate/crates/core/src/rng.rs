//! Seeded random streams.
//!
//! Every trial owns one [`TrialRng`]. Streams are derived from a master seed
//! and a tuple of indices, so adding sweep cells never shifts the streams of
//! existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Portable, reproducible stream used by trials and integrator runs.
pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `indices` into `master` one at a time.
pub fn derive_seed(master: u64, indices: &[u64]) -> u64 {
    indices.iter().fold(mix64(master), |acc, &i| {
        mix64(acc ^ mix64(i.wrapping_add(1)))
    })
}

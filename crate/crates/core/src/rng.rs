//! Seeded randomness.
//!
//! Every stochastic routine takes an explicit `u64` seed and builds a
//! [`ChaCha8Rng`] from it. Sub-streams (per trial, per quasi-tree copy) are
//! derived with a SplitMix64 finalizer so that results do not depend on the
//! order in which streams are consumed or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th sub-stream of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed keyed by an arbitrary word sequence.
pub fn keyed_seed(seed: u64, key: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ (key.len() as u64).wrapping_mul(0xA076_1D64_78BD_642F));
    for &k in key {
        h = splitmix64(h ^ k);
    }
    h
}

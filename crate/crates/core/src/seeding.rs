//! Deterministic seed derivation.
//!
//! Every randomised stage (signal synthesis, bootstrap draws, feature
//! subsampling, fold shuffling) gets its own child seed derived from the
//! caller's base seed and a stable index. Child streams are therefore
//! independent of each other and of how many siblings exist: adding trees
//! to a forest or records to a dataset never perturbs the ones already
//! generated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step, the usual 64-bit finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the child seed for stream `index` under `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// A fresh deterministic generator for the given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

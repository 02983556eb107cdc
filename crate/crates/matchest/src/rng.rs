//! Seed derivation for reproducible, order-independent trial streams.
//!
//! Every random choice in the library flows from one 64-bit master seed.
//! Child streams are derived by mixing `(seed, purpose, trial)` through
//! splitmix64, so trials can run in any order (or in parallel) and still
//! produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for child stream derivation. Each independent source of
/// randomness gets its own tag so streams never alias.
pub mod purpose {
    pub const WORLD_COIN: u64 = 0x01;
    pub const LABELING: u64 = 0x02;
    pub const DUMMY_EDGES: u64 = 0x03;
    pub const CORE_EDGES: u64 = 0x04;
    pub const LIST_SHUFFLE: u64 = 0x05;
    pub const FLAT_PLAN: u64 = 0x06;
    pub const ESTIMATOR: u64 = 0x07;
    pub const DISTINGUISHER: u64 = 0x08;
    pub const TREE_ROOT: u64 = 0x09;
    pub const INSTANCE: u64 = 0x0a;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes `(seed, purpose, trial)` into a child seed.
pub fn derive_seed(seed: u64, purpose: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(purpose)) ^ splitmix64(trial))
}

/// A seeded generator for the given `(seed, purpose, trial)` triple.
pub fn stream(seed: u64, purpose: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, purpose, trial))
}

//! Deterministic seed expansion.
//!
//! Child seeds are produced by SplitMix64 over the master seed mixed with a
//! stream tag and an index, so every (stream, index) pair maps to its own
//! generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// One SplitMix64 output for state `x`.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let s = splitmix64(master ^ splitmix64(stream.wrapping_mul(GOLDEN)));
    splitmix64(s ^ splitmix64(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Stream tags used by the experiment harness.
pub mod stream {
    pub const MODEL: u64 = 1;
    pub const DATA: u64 = 2;
    pub const CHAIN: u64 = 3;
    pub const TEST: u64 = 4;
    pub const EVAL: u64 = 5;
}

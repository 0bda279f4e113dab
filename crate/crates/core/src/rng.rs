//! Seeded random streams.
//!
//! Every consumer of randomness owns its own [`SeededRng`]. Child streams are
//! derived from a master seed and a stream index with a SplitMix64 mix, so
//! `(seed, stream)` always maps to the same generator regardless of how many
//! other streams were created before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Stream indices used by the training loop.
pub mod streams {
    pub const ENV: u64 = 1;
    pub const SAMPLER: u64 = 2;
    pub const INIT: u64 = 3;
    pub const EVAL: u64 = 4;
    pub const REPLAY: u64 = 5;
    pub const EXPLORATION: u64 = 6;
    pub const MASKS: u64 = 7;
    /// Base index for per-ensemble-member target sampling; member `k` uses `TARGET_BASE + k`.
    pub const TARGET_BASE: u64 = 1_000;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `stream` of master seed `seed`.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(stream.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(seed: u64, stream: u64) -> SeededRng {
    rng_from_seed(split_seed(seed, stream))
}

//! Counter-based random streams.
//!
//! Every stochastic routine draws from a ChaCha8 stream selected by a seed and
//! a key path, e.g. `(seed, [SHARED, x, replicate])`. Streams with different
//! keys are independent and can be consumed from any thread in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Key-path tags for the distinct roles randomness plays.
pub mod tag {
    pub const ENCODER: u64 = 1;
    pub const PRIOR: u64 = 2;
    pub const SAMPLE: u64 = 3;
    pub const SHARED: u64 = 4;
    pub const ALICE: u64 = 5;
    pub const BOB: u64 = 6;
    pub const NEWMAN: u64 = 7;
    pub const CORPUS: u64 = 8;
    pub const CHANNEL: u64 = 9;
    pub const ENSEMBLE: u64 = 10;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, key: &[u64]) -> StreamRng {
    let id = key
        .iter()
        .fold(0x5172_6163_6c61_6200u64, |acc, &k| splitmix64(acc ^ splitmix64(k)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Derives a child seed, for APIs that take a plain `u64` seed.
pub fn derive_seed(seed: u64, key: &[u64]) -> u64 {
    key.iter().fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ k))
}

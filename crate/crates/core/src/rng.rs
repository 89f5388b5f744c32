//! Seeded random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type threaded through every stochastic operation.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit child seed for stream `index` under `parent`.
///
/// Child seeds depend only on `(parent, index)`, so appending scenes never changes earlier ones.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Named sub-streams of one scene seed, so that e.g. camera sampling does not shift when the
/// plating draws a different number of values.
pub mod stream {
    pub const COMPOSE: u64 = 1;
    pub const RIG: u64 = 2;
    pub const BRIGHTNESS: u64 = 3;
    pub const VIEWS: u64 = 4;
    pub const RETRY: u64 = 5;
}

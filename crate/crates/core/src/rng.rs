//! Seeded random streams.
//!
//! Every stochastic stage draws from its own ChaCha stream derived from one
//! experiment seed, so stages can be reordered or skipped without shifting
//! each other's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers for the stochastic stages.
pub mod stream {
    pub const INIT: u64 = 1;
    pub const GENERATE: u64 = 2;
    pub const ATTACK: u64 = 3;
    pub const GRADCHECK: u64 = 4;
}

/// A generator for `stream` of the experiment seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

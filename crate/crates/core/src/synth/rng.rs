//! Seeded random streams.
//!
//! Every stochastic routine draws from `ChaCha8Rng` seeded with the user seed
//! and switched to a numbered stream, so independent pieces of work (one
//! Monte-Carlo trial, one partition set) never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `ChaCha8Rng::seed_from_u64(seed)` on stream `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit [`StreamRng`]. Work that fans
//! out (median repetitions, per-power estimates) draws one sub-seed from the
//! caller's stream and gives branch `i` the ChaCha stream `i` under that
//! sub-seed, so results do not depend on how branches are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counter-based generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Generator for `(seed, stream_id)`.
pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Draw a sub-seed from `rng` for deriving independent branch streams.
pub fn fork(rng: &mut StreamRng) -> u64 {
    rng.next_u64()
}

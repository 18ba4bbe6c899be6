//! Seeded random streams.
//!
//! Every trajectory owns a ChaCha8 generator keyed by a 64-bit seed. Grid
//! points share the sweep's key and are separated by the ChaCha stream id,
//! which is the point index, so streams never overlap regardless of how
//! points are scheduled onto workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for a standalone trajectory.
pub fn trajectory_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for stream `stream` under key `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

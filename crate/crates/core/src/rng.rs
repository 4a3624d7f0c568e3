//! Named random sub-streams derived from one master seed.
//!
//! Every stochastic element of a run draws from its own ChaCha8 stream, so
//! switching one element off (or changing how many values it consumes)
//! leaves the others untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stochastic elements of a run, each mapped to a ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    Mobility = 2,
    LineOfSight = 3,
    Shadowing = 4,
}

/// Returns the generator for `stream` under `seed`.
pub fn stream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

//! Named random streams derived from one master seed.
//!
//! Each stream is a ChaCha8 generator keyed by `seed_from_u64(master)` with
//! the 64-bit ChaCha stream id set to the stream's tag, so the three streams
//! never overlap and adding draws to one leaves the others untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Per-iteration sample indices.
    Samples = 1,
    /// Problem instance generation.
    Instance = 2,
    /// Uniform output-index selection.
    Output = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

//! Reproducible random streams.
//!
//! Every run derives its generator from `(seed, index)`: ChaCha8 keyed by the
//! seed, with the index selecting the stream. Streams for distinct indices are
//! independent, so trials can execute in any order or concurrently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

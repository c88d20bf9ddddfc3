//! Seeded random streams.
//!
//! Every randomized routine draws from a ChaCha8 generator keyed by a user
//! seed and a stream index, so a given (seed, stream) pair always produces
//! the same sequence no matter how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

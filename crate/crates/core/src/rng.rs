//! Seeded, splittable random streams.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by `(seed, stream)`,
//! so replicate `r` can be regenerated without producing replicates `0..r`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

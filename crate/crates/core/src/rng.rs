//! Seeding conventions.
//!
//! Every random quantity is drawn from a ChaCha8 stream cipher RNG keyed by a
//! 64-bit seed, with separate stream ids per purpose. Streams never overlap,
//! so per-path noise, regime jumps, weight initialization, and shuffling are
//! all independent yet reproducible from the seeds recorded in provenance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STREAM_NOISE: u64 = 0;
const STREAM_REGIME: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Gaussian noise stream for one sample path.
pub fn noise_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_NOISE)
}

/// Regime-jump stream for one sample path.
pub fn regime_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_REGIME)
}

/// Weight-initialization stream.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_INIT)
}

/// Minibatch-shuffle stream (one stream for the whole training run).
pub fn shuffle_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_SHUFFLE)
}

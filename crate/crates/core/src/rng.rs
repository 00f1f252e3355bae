//! Deterministic per-sample random streams.
//!
//! Every stochastic operation that touches one dataset sample derives its own
//! ChaCha8 stream from `(seed, sample index, domain tag)`. The 32-byte cipher
//! seed is laid out as
//!
//! ```text
//!   bytes  0..8   user seed, little endian
//!   bytes  8..16  sample index, little endian
//!   bytes 16..32  16-byte ASCII domain tag
//! ```
//!
//! Distinct (seed, index, tag) triples give statistically independent streams,
//! so batch generation can run one rayon task per sample and still reproduce
//! the sequential output bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for channel realization draws.
pub const TAG_CHANNEL_GEN: [u8; 16] = *b"sscm.channel.gen";

/// Stream tag for the noise-injection augmentation.
pub const TAG_NOISE_INJECT: [u8; 16] = *b"sscm.noise.injct";

/// Build the ChaCha8 stream for one sample.
pub fn sample_stream(seed: u64, index: u64, tag: [u8; 16]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..].copy_from_slice(&tag);
    ChaCha8Rng::from_seed(key)
}

//! Deterministic, labelled random streams.
//!
//! Every stochastic stage of the pipeline draws from its own [`RngStream`],
//! identified by a `(seed, label)` pair. Identical pairs always replay the
//! same sequence; distinct labels (or seeds) give statistically independent
//! streams. Streams are never shared between workers: a stream is either
//! consumed by one task or split with [`RngStream::substream`] /
//! [`RngStream::derive`], both of which depend only on the stream's identity,
//! not on how far it has been advanced. This is what makes replicate studies
//! parallelizable without changing their output.

use std::convert::Infallible;

use rand::rand_core::TryRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A deterministic pseudo-random stream derived from `(seed, label)`.
///
/// Backed by ChaCha8, a counter-based generator with 2^64 independent
/// streams per seed; the label is hashed onto the stream index.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream_id: u64,
}

/// Entry point used throughout the crate: a stream for `(seed, label)`.
pub fn make_stream(seed: u64, label: &str) -> RngStream {
    RngStream::new(seed, label)
}

impl RngStream {
    pub fn new(seed: u64, label: &str) -> Self {
        Self::with_stream_id(seed, fnv1a64(label.as_bytes()))
    }

    fn with_stream_id(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            rng,
            seed,
            stream_id,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream for a named purpose. Depends only on the parent's
    /// identity, so deriving commutes with drawing.
    pub fn derive(&self, label: &str) -> RngStream {
        let id = mix64(self.stream_id ^ mix64(fnv1a64(label.as_bytes())));
        Self::with_stream_id(self.seed, id)
    }

    /// Child stream for an indexed task (replicate, worker).
    pub fn substream(&self, index: u64) -> RngStream {
        let id = mix64(self.stream_id ^ mix64(index.wrapping_add(0x9E3779B97F4A7C15)));
        Self::with_stream_id(self.seed, id)
    }

    /// Uniform draw on `[0, 1)` with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }
}

// Infallible `TryRng` gives the blanket `Rng` impl, which is what the
// distribution samplers consume.
impl TryRng for RngStream {
    type Error = Infallible;

    fn try_next_u32(&mut self) -> Result<u32, Infallible> {
        Ok(self.rng.next_u32())
    }

    fn try_next_u64(&mut self) -> Result<u64, Infallible> {
        Ok(self.rng.next_u64())
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Infallible> {
        self.rng.fill_bytes(dest);
        Ok(())
    }
}

/// Derive a per-replicate seed from a base seed. Used where a whole run,
/// not just a stream, is re-keyed (replicate studies record these).
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    mix64(base_seed ^ mix64(index.wrapping_add(0xD1342543DE82EF95)))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF29CE484222325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100000001B3);
    }
    hash
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

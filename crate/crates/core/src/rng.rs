//! Seeded, splittable random streams.
//!
//! Every stochastic routine in the crate takes an explicit [`RngStream`].
//! A stream is identified by `(seed, stream_id)`; the pair fully determines
//! the sequence of draws, and distinct stream ids give independent
//! ChaCha streams for the same seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Stream for trial `index` of an experiment seeded with `seed`.
    pub fn for_trial(seed: u64, index: u64) -> Self {
        Self::new(seed, index)
    }

    /// Derive an independent child stream keyed by `tag`.
    ///
    /// The child seed is a mix of this stream's identity and the tag, so the
    /// result does not depend on how many values were drawn from `self`.
    pub fn child(&self, tag: u64) -> Self {
        let mixed = splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x9e37_79b9)));
        Self::new(splitmix64(mixed ^ tag), tag)
    }

    /// Draw a fresh seed from this stream (advances it).
    pub fn fork(&mut self) -> Self {
        let seed = self.inner.next_u64();
        let stream = self.inner.next_u64();
        Self::new(seed, stream)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

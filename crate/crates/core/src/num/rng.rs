use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha8, whose 64-bit stream parameter selects one of 2^64
/// independent keystreams for the same key. Equal `(seed, stream)` pairs
/// always produce the same sequence, independent of threading.
#[derive(Debug, Clone)]
pub struct StreamRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    /// Stream whose id is a hash of `keys`, e.g. `(cell, replicate)`.
    pub fn keyed(seed: u64, keys: &[u64]) -> Self {
        Self::new(seed, hash_keys(keys))
    }

    /// Fresh generator for sub-task `id` of this stream. The parent's
    /// position is irrelevant, so children can be created in any order.
    pub fn fork(&self, id: u64) -> Self {
        Self::keyed(self.seed, &[self.stream, id])
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive 64-bit hash of a key tuple.
pub(crate) fn hash_keys(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x6A09_E667_F3BC_C908_u64 ^ keys.len() as u64, |h, &k| splitmix(h ^ splitmix(k)))
}

impl RngCore for StreamRng {
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

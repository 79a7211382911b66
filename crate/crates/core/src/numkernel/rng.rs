use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Portable seeded random stream.
///
/// Backed by ChaCha8 with the seed expanded through `SeedableRng::seed_from_u64`,
/// so a given `(seed, stream)` pair yields the same bits on every platform.
/// Independent substreams for pipeline stages are selected with
/// [`SeededRng::substream`], which sets the ChaCha stream id rather than
/// perturbing the key.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh generator on stream `stream` of the same seed, starting at word 0.
    pub fn substream(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        Self { seed: self.seed, inner }
    }
}

impl RngCore for SeededRng {
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

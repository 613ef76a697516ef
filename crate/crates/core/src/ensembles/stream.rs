//! Counter-based random streams.
//!
//! Draw `j` of stream `(seed, index)` is a pure function of the triple, so
//! replicas can be scheduled on any number of workers without changing the
//! numbers they see.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    index: u64,
    key: u64,
    counter: u64,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let key = mix64(seed ^ mix64(index.wrapping_add(0x632B_E59B_D9B4_E019)));
        RandomStream { seed, index, key, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Number of 64-bit words consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Word `j` of this stream, independent of the current position.
    pub fn word_at(&self, j: u64) -> u64 {
        mix64(self.key.wrapping_add(j.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// A child stream, e.g. one per replica of an experiment.
    pub fn substream(&self, sub: u64) -> RandomStream {
        RandomStream::new(mix64(self.seed ^ self.index.rotate_left(17)) ^ GOLDEN, sub)
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let w = self.word_at(self.counter);
        self.counter += 1;
        w
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}

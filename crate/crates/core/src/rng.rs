//! Counter-based random streams.
//!
//! A stream is a ChaCha8 keystream: the key comes from the dataset seed and
//! the 64-bit stream id is the image index, so the stream for image `i` is a
//! pure function of `(seed, i)` and never depends on which images were
//! generated before it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Debug)]
pub struct Stream {
    inner: ChaCha8Rng,
}

/// Stream for image `index` of the dataset keyed by `seed`.
pub fn derive_stream(seed: u64, index: u64) -> Stream {
    let mut inner = ChaCha8Rng::seed_from_u64(seed);
    inner.set_stream(index);
    Stream { inner }
}

impl Stream {
    pub fn from_seed(seed: u64) -> Self {
        Stream {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Forks a child stream. The parent advances by exactly one draw, so the
    /// parent's later output does not depend on how much the child is used.
    pub fn split(&mut self) -> Stream {
        let mut key = [0u8; 32];
        self.inner.fill_bytes(&mut key);
        Stream {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw from `[lo, hi)`; returns `lo` when the interval is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for Stream {
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

//! Reproducible per-path random streams.
//!
//! Every stochastic object in the crate draws from a [`Stream`] identified by
//! `(master seed, stream id)`. The stream id selects a ChaCha8 stream, so a
//! path's randomness depends only on its index and never on the order in
//! which paths are generated or on the number of worker threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// SplitMix64 finaliser, used to derive child stream ids.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Address of a random stream: a master seed plus a stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub stream: u64,
}

impl StreamKey {
    pub fn root(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Child key for sub-task `index`; distinct indices give distinct streams.
    pub fn child(self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: mix64(self.stream ^ mix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    pub fn rng(self) -> Stream {
        Stream::new(self)
    }
}

/// A deterministic random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(key: StreamKey) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(key.seed);
        inner.set_stream(key.stream);
        Self { inner }
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Fills `out` with i.i.d. `N(0, variance)` draws.
    pub fn fill_normal(&mut self, out: &mut [f64], variance: f64) {
        let sd = variance.sqrt();
        for v in out.iter_mut() {
            *v = sd * self.normal();
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

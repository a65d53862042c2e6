//! Seeded random stream shared by every model.
//!
//! All randomness in a run flows through one [`RngStream`]. Two streams built
//! from the same seed and driven by the same call sequence produce the same
//! values on every platform, which is what makes replays byte-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform integer on the closed interval `[lo, hi]`.
    #[inline]
    pub fn uniform_int(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        self.inner.random_range(lo..=hi)
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.inner.random_range(0..n)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        // random_bool panics outside [0, 1]; callers pass probabilities only.
        self.inner.random_bool(p)
    }

    #[inline]
    pub fn coin(&mut self) -> bool {
        self.inner.random::<bool>()
    }

    /// Uniform real on `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.below(items.len())])
        }
    }
}

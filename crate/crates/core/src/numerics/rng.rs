use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// A seeded, single-owner random stream.
///
/// Equal seeds give bit-identical sequences. The full generator state
/// serializes, so a checkpointed stream resumes exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A stream keyed by a base seed and a tuple of tags (purpose, slot,
    /// target id, ...). Independent keys give statistically independent
    /// streams, which lets two runs share the random numbers of any
    /// sub-experiment they have in common.
    pub fn derived(base: u64, tags: &[u64]) -> Self {
        Self::new(derive_seed(base, tags))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds tags into a base seed with repeated SplitMix64 mixing:
/// `h₀ = splitmix(base)`, `hₖ₊₁ = splitmix(hₖ ⊕ tagₖ)`.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |h, t| splitmix64(h ^ *t))
}

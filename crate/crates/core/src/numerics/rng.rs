//! Seeded random streams.
//!
//! All randomness flows through [`Rng`], a thin wrapper around ChaCha8
//! (`rand_chacha::ChaCha8Rng`), whose output stream is fixed by its seed on
//! every platform. Independent concerns (weight init, the projection matrix,
//! feedback matrices, shuffling, dropout) each get their own stream derived
//! from one master seed, so any of them can be regenerated in isolation.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named consumers of randomness within one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Concern {
    Weights,
    Projection,
    Feedback,
    Shuffle,
    Dropout,
    LinearDynamics,
}

impl Concern {
    pub fn tag(self) -> &'static str {
        match self {
            Concern::Weights => "weights",
            Concern::Projection => "projection",
            Concern::Feedback => "feedback",
            Concern::Shuffle => "shuffle",
            Concern::Dropout => "dropout",
            Concern::LinearDynamics => "linear-dynamics",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for `concern`, independent of every other concern's stream.
    pub fn for_concern(master_seed: u64, concern: Concern) -> Self {
        Rng::new(derive_seed(master_seed, concern.tag(), 0))
    }

    /// Stream for `concern` at a sub-index (e.g. epoch number).
    pub fn for_concern_indexed(master_seed: u64, concern: Concern, index: u64) -> Self {
        Rng::new(derive_seed(master_seed, concern.tag(), index.wrapping_add(1)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(rand_distr::StandardNormal)
    }

    pub(crate) fn inner_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed from `(master, tag, index)`: FNV-1a over the tag, then SplitMix64 mixing.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix64(mix64(master ^ h) ^ mix64(index))
}

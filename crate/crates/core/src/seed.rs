//! Per-trial seeding.
//!
//! Each trial gets its own ChaCha8 stream keyed by
//! `mix(base, trial_index)`, where `mix` is the SplitMix64 finalizer applied
//! to `base + (trial_index + 1) * 0x9E3779B97F4A7C15` (wrapping). For a fixed
//! base the map is injective in the trial index: the golden-ratio increment is
//! odd, so the affine step is a bijection of `u64`, and the finalizer is a
//! bijection as well.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Stafford variant 13).
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The documented avalanche mix of a base seed and a trial index.
#[inline]
pub fn mix(base: u64, trial_index: u64) -> u64 {
    splitmix64(base.wrapping_add(trial_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub base: u64,
    pub trial_index: u64,
}

impl Seed {
    pub fn new(base: u64, trial_index: u64) -> Self {
        Seed { base, trial_index }
    }

    pub fn stream_seed(&self) -> u64 {
        mix(self.base, self.trial_index)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.stream_seed())
    }
}

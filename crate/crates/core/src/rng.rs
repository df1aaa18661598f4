//! Seeded randomness.
//!
//! Every random draw in the crate comes from a [`SeededRng`] built from a
//! `u64` seed. The uniform → Laplace/Gaussian transforms live in
//! [`crate::mechanisms::noise`] and consume this stream in a fixed order, so
//! golden outputs do not depend on any distribution crate's internals.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// ChaCha20 stream with a uniform-(0,1) helper.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on the open interval (0, 1): `(k + 0.5) / 2^53` for a
    /// 53-bit `k`, so neither endpoint nor exactly 0.5 can occur.
    pub fn uniform_open(&mut self) -> f64 {
        let k = self.next_u64() >> 11;
        (k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..bound` by rejection (no modulo bias).
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "below() needs a positive bound");
        let bound = bound as u64;
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Derive an independent child seed from `(parent, stream)` with a
/// splitmix64 finalizer.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    let mut z = parent ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

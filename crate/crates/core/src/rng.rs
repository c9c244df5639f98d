//! Seed derivation and the sampling primitives shared by every stochastic step.
//!
//! All randomness flows from a single 64-bit seed. Child seeds are derived with
//! [`mix`], so work items can be executed in any order (or in parallel) and still
//! produce the same streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Deterministic generator used throughout the crate.
pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and a stream index.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(GOLDEN).rotate_left(17))
}

/// Fold a sequence of indices into `seed`.
pub fn mix_all(seed: u64, indices: &[u64]) -> u64 {
    indices.iter().fold(seed, |acc, &i| mix(acc, i))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn normal_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| standard_normal(rng)).collect()
}

/// `k` distinct indices from `0..n`, in ascending order.
pub fn subsample_indices(rng: &mut Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn mix_is_deterministic_and_spreads() {
        assert_eq!(mix(7, 3), mix(7, 3));
        let seeds: HashSet<u64> = (0..10_000).map(|i| mix(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(mix(1, 0), mix(0, 1));
    }

    #[test]
    fn subsample_is_sorted_and_distinct() {
        let mut rng = rng_from_seed(5);
        let idx = subsample_indices(&mut rng, 100, 80);
        assert_eq!(idx.len(), 80);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert!(*idx.last().unwrap() < 100);
    }
}

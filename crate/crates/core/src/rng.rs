//! Seeded randomness for the synthetic generator.
//!
//! The stream is ChaCha8 (as implemented by `rand_chacha`) keyed from a `u64`
//! with `rand_core`'s `seed_from_u64` expansion (PCG32 fill of the 32-byte
//! key). Every derived draw is defined here rather than delegated to `rand`
//! distributions so that outputs stay fixed across library versions:
//!
//! * `unit`: top 53 bits of one `u64`, scaled by 2⁻⁵³.
//! * `below(n)`: rejection sampling on the widening product, one `u64` per try.
//! * `shuffle`: Fisher-Yates from the last position down.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n`. Panics when `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        let n = n as u64;
        // Lemire's widening multiply with rejection of the biased zone.
        let zone = n.wrapping_neg() % n;
        loop {
            let wide = u128::from(self.next_u64()) * u128::from(n);
            if (wide as u64) >= zone {
                return (wide >> 64) as usize;
            }
        }
    }

    /// Uniform in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Index drawn proportionally to `weights` (all non-negative, not all 0).
    pub fn weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut target = self.unit() * total;
        for (i, w) in weights.iter().enumerate() {
            if target < *w {
                return i;
            }
            target -= w;
        }
        weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }

    /// `k` distinct indices drawn proportionally to `weights`, successively
    /// without replacement, in draw order.
    pub fn weighted_distinct(&mut self, weights: &[f64], k: usize) -> Vec<usize> {
        let mut w = weights.to_vec();
        let mut out = Vec::with_capacity(k);
        for _ in 0..k.min(w.iter().filter(|x| **x > 0.0).count()) {
            let i = self.weighted(&w);
            w[i] = 0.0;
            out.push(i);
        }
        out
    }

    /// `k` distinct indices from `0..n`, uniformly, in draw order.
    pub fn sample(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut all: Vec<usize> = (0..n).collect();
        let k = k.min(n);
        for i in 0..k {
            let j = i + self.below(n - i);
            all.swap(i, j);
        }
        all.truncate(k);
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let a: Vec<u64> = {
            let mut r = SeededRng::new(42);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let mut r = SeededRng::new(42);
        assert!(a.iter().all(|x| *x == r.next_u64()));
        assert_ne!(SeededRng::new(43).next_u64(), a[0]);
    }

    #[test]
    fn ranges() {
        let mut r = SeededRng::new(7);
        let mut hits = [0usize; 5];
        for _ in 0..5000 {
            let u = r.unit();
            assert!((0.0..1.0).contains(&u));
            hits[r.below(5)] += 1;
        }
        assert!(hits.iter().all(|h| (850..1150).contains(h)));
        for _ in 0..100 {
            assert!((3..=4).contains(&r.range_inclusive(3, 4)));
        }
    }

    #[test]
    fn shuffle_and_sample_are_permutations() {
        let mut r = SeededRng::new(1);
        let mut v: Vec<usize> = (0..20).collect();
        r.shuffle(&mut v);
        let mut s = v.clone();
        s.sort_unstable();
        assert_eq!(s, (0..20).collect::<Vec<_>>());
        let picked = r.sample(10, 4);
        assert_eq!(picked.len(), 4);
        assert!(picked.iter().all(|i| *i < 10));
        let mut d = picked.clone();
        d.dedup();
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn weighted_skips_zero_weights() {
        let mut r = SeededRng::new(3);
        for _ in 0..200 {
            assert_ne!(r.weighted(&[1.0, 0.0, 2.0]), 1);
        }
        let mut d = r.weighted_distinct(&[1.0, 0.0, 1.0, 1.0], 10);
        d.sort_unstable();
        assert_eq!(d, [0, 2, 3]);
    }
}

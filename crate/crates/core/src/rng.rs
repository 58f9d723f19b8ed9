// SPDX-License-Identifier: Apache-2.0

//! Seeded 64-bit linear congruential generator.
//!
//! State update is `s' = s * 6364136223846793005 + 1442695040888963407 (mod 2^64)`
//! (Knuth's MMIX constants). Only the upper 32 bits of the state are used as
//! output; the low bits of a power-of-two LCG have short periods.

const MUL: u64 = 6364136223846793005;
const INC: u64 = 1442695040888963407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        let mut rng = Lcg64 { state: seed };
        rng.step();
        rng
    }

    /// Derives an independent stream for a sub-task (e.g. one classifier).
    pub fn derive(seed: u64, stream: u64) -> Self {
        Lcg64::new(seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn step(&mut self) {
        self.state = self.state.wrapping_mul(MUL).wrapping_add(INC);
    }

    pub fn next_u32(&mut self) -> u32 {
        self.step();
        (self.state >> 32) as u32
    }

    pub fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        (hi << 32) | lo
    }

    /// Uniform integer in `[0, bound)` by multiply-shift on 32 output bits.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0 && bound <= u32::MAX as usize);
        ((self.next_u32() as u64 * bound as u64) >> 32) as usize
    }

    /// Uniform float in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = Lcg64::new(7);
        let mut b = Lcg64::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut v: Vec<usize> = (0..50).collect();
        Lcg64::new(3).shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = Lcg64::new(11);
        for bound in 1..40 {
            for _ in 0..20 {
                assert!(r.below(bound) < bound);
            }
        }
    }
}

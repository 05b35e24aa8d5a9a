//! Seeded random number generation.
//!
//! Everything random in this crate (mask draws, attenuation scaling) flows
//! through [`SplitMix64`], the 64-bit generator of Steele, Lea & Burton
//! ("Fast splittable pseudorandom number generators", OOPSLA 2014), in the
//! form popularized by Vigna. The algorithm is fixed here so that any
//! implementation, in any language, reproduces the same stream from the same
//! seed:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z  = state
//! z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! out = z ^ (z >> 31)
//! ```
//!
//! Derived draws are equally pinned down: `next_f64` takes the top 53 bits,
//! and bounded integers use modulo with rejection of the biased tail.

/// SplitMix64 generator. Copy it freely; the stream continues from the
/// copied state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` using the top 53 bits: `(x >> 11) * 2^-53`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`, unbiased. Draws above the largest
    /// multiple of `n` are rejected and redrawn.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let limit = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < limit {
                return x % n;
            }
        }
    }

    /// `count` distinct values from `[lo, hi]`, ascending. Partial
    /// Fisher-Yates over the materialized range.
    pub fn sample_distinct(&mut self, lo: usize, hi: usize, count: usize) -> Vec<usize> {
        debug_assert!(lo <= hi && count <= hi - lo + 1);
        let mut pool: Vec<usize> = (lo..=hi).collect();
        for i in 0..count {
            let j = i + self.below((pool.len() - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut picked = pool[..count].to_vec();
        picked.sort_unstable();
        picked
    }
}

//! Deterministic 64-bit random generator.
//!
//! Everything randomized in this crate (graph sampling, Monte-Carlo
//! estimation, sampled verification) draws from this generator, so results
//! are reproducible bit-for-bit across platforms from a single `u64` seed.
//! The algorithm is SplitMix64: `state += 0x9E3779B97F4A7C15` per step,
//! followed by the xor-shift/multiply finalizer.

/// SplitMix64 stream.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer applied to a single word.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform integer in `[0, bound)`, unbiased via rejection of the
    /// wrap-around remainder. `bound` must be nonzero.
    #[inline]
    pub fn uniform_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // 2^64 mod bound; draws below it are rejected so every residue
        // class is hit by exactly floor(2^64 / bound) raw values.
        let cutoff = (u64::MAX % bound).wrapping_add(1) % bound;
        loop {
            let raw = self.next_u64();
            if raw >= cutoff {
                return (raw - cutoff) % bound;
            }
        }
    }

    /// Bernoulli trial with success probability exactly `num/den`.
    #[inline]
    pub fn bernoulli(&mut self, num: u64, den: u64) -> bool {
        self.uniform_below(den) < num
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.uniform_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Derives the seed of the `index`-th substream of `seed`.
///
/// Used to give each Monte-Carlo sample its own generator so samples can be
/// evaluated in any order (or in parallel) without changing the result.
#[inline]
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

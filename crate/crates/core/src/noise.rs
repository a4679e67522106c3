//! Counter-based Gaussian noise.
//!
//! Variate `s` of a stream is a fixed function of `(seed, stream, s)`: it is
//! read from ChaCha8 word position `4 s` and mapped through Box–Muller, so any
//! index can be regenerated without replaying the ones before it.

use std::f64::consts::TAU;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS_PER_VARIATE: u128 = 4;

/// Standard normal variates addressed by index.
#[derive(Clone, Debug)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Variate number `index`.
    pub fn sample(&mut self, index: u64) -> f64 {
        self.rng.set_word_pos(u128::from(index) * WORDS_PER_VARIATE);
        self.next()
    }

    /// Fills `out` with variates `start, start + 1, ...`.
    pub fn fill(&mut self, start: u64, out: &mut [f64]) {
        self.rng.set_word_pos(u128::from(start) * WORDS_PER_VARIATE);
        for v in out {
            *v = self.next();
        }
    }

    fn next(&mut self) -> f64 {
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * f64::EPSILON / 2.0;
        let u2 = (self.rng.next_u64() >> 11) as f64 * f64::EPSILON / 2.0;
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }
}

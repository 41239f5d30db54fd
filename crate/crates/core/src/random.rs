//! Seeded random stream used by the samplers and the feasible-set generator.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded
//! from a `u64` through `SeedableRng::seed_from_u64`. Its output stream is
//! specified independently of platform and word size, and all derived
//! variates below are computed from raw `u64` draws, so a seed fixes the
//! sample bit for bit.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::normal;

#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`: midpoints of the 2⁵³-cell grid.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard exponential by inversion.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Standard normal by inversion of the distribution function.
    pub fn normal(&mut self) -> f64 {
        normal::inverse_cdf(self.uniform())
    }
}

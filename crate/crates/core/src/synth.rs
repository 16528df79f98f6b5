//! Reproducible synthetic data.
//!
//! The generator is SplitMix64. Uniforms take the top 53 bits of each output,
//! `u = (x >> 11) · 2⁻⁵³`, and normals use one Box–Muller draw per pair of
//! uniforms, `z = √(−2 ln(1 − u₁)) · cos(2π u₂)`. Datasets are filled one
//! sample at a time, coordinates in order, so a given seed always yields the
//! same values.

use crate::dataset::Dataset;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// `n` samples of a `d`-dimensional standard normal.
pub fn gaussian_dataset(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let mut rng = SplitMix64::new(seed);
    let mut data = vec![0.0; d * n];
    for j in 0..n {
        for i in 0..d {
            data[i * n + j] = rng.next_gaussian();
        }
    }
    Dataset::new(d, n, data)
}

//! Seeded randomness for sampling sweeps; every stream is reproducible from a
//! `u64` seed and a stream index.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::grid::{RadialFunction, RadialGrid};
use crate::num::{self, abs, exp, powi, sin, PI};
use crate::Result;

pub struct SampleRng(ChaCha8Rng);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent stream `index` derived from `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self(rng)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal by Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u = 1.0 - self.uniform();
        let v = self.uniform();
        num::sqrt(-2.0 * num::ln(u)) * num::cos(2.0 * num::PI * v)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n.max(1)
    }
}

/// Smooth random radial profile vanishing at `R`: a few Dirichlet sine modes
/// plus a Gaussian bump at a random radius, normalized in `L^2`. With
/// `signed = false` the absolute value is returned.
pub fn random_profile(grid: &Arc<RadialGrid>, rng: &mut SampleRng, signed: bool) -> Result<RadialFunction> {
    let radius = grid.radius();
    let modes = 1 + rng.below(6);
    let coeffs: Vec<f64> = (0..modes)
        .map(|k| rng.normal() / (1 + k) as f64)
        .collect();
    let center = rng.range(0.0, radius);
    let width = rng.range(0.05, 0.3) * radius;
    let height = rng.normal();
    let f = RadialFunction::from_fn(grid.clone(), |r| {
        let mut s = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            let kk = (k + 1) as f64;
            s += c * sin(kk * PI * r / radius);
        }
        let z = (r - center) / width;
        let bump = height * exp(-z * z) * (1.0 - powi(r / radius, 2));
        s + bump
    })?;
    let f = if signed { f } else { f.map(abs) };
    Ok(f.normalized())
}

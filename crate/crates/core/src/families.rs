//! Seeded and closed-form test functions used by tests, suites and the CLI.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Result};
use crate::lattice::GridFunction;
use crate::operators::HypercubeFunction;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform values in [−1, 1].
pub fn random_grid(modulus: usize, n: usize, d: usize, p: f64, seed: u64) -> Result<GridFunction> {
    let mut rng = seeded(seed);
    GridFunction::from_fn(modulus, n, d, p, |_, out| {
        for v in out.iter_mut() {
            *v = rng.random_range(-1.0..=1.0);
        }
    })
}

/// Indicator of the origin, scalar valued.
pub fn indicator_grid(modulus: usize, n: usize, p: f64) -> Result<GridFunction> {
    GridFunction::from_fn(modulus, n, 1, p, |x, out| out[0] = if x.iter().all(|&c| c == 0) { 1.0 } else { 0.0 })
}

/// x ↦ cos(2π⟨x, y⟩/M), the real part of a character.
pub fn character_real(modulus: usize, y: &[i64], p: f64) -> Result<GridFunction> {
    let m = modulus as i64;
    GridFunction::from_fn(modulus, y.len(), 1, p, |x, out| {
        let dot: i64 = x.iter().zip(y).map(|(&a, &b)| a as i64 * b).sum();
        out[0] = (2.0 * PI * dot.rem_euclid(m) as f64 / modulus as f64).cos();
    })
}

/// x ↦ cos(π x_1 / half), a function of the first coordinate only.
pub fn cosine_grid(modulus: usize, n: usize, half: usize, p: f64) -> Result<GridFunction> {
    if half == 0 {
        return param("cosine half-period must be positive");
    }
    GridFunction::from_fn(modulus, n, 1, p, |x, out| out[0] = (PI * x[0] as f64 / half as f64).cos())
}

/// Uniform values in [−1, 1] on {−1,1}^n.
pub fn random_hypercube(n: usize, d: usize, p: f64, seed: u64) -> Result<HypercubeFunction> {
    let mut rng = seeded(seed);
    let values = (0..(d << n)).map(|_| rng.random_range(-1.0..=1.0)).collect();
    HypercubeFunction::new(n, d, p, values)
}

/// n vectors in ℝ^d with uniform entries in [−1, 1].
pub fn random_vectors(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect()
}

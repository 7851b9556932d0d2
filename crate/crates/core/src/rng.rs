//! Seeded randomness. Everything random in the crate draws from a ChaCha
//! stream derived from a single 64-bit seed.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::linalg::{self, Frame, Matrix};

pub type SeededRng = ChaCha8Rng;

/// Independent streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Sampling = 0,
    Kappa = 1,
    Perturb = 2,
    Packing = 3,
    Metrics = 4,
    Rotation = 5,
}

pub fn seeded(seed: u64, stream: Stream) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Uniform in `[0, 1)` with 53 random bits.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform_in(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(rng)
}

/// Uniform index in `0..n`; `n` must be positive.
pub fn index(rng: &mut impl RngCore, n: usize) -> usize {
    ((uniform(rng) * n as f64) as usize).min(n - 1)
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut impl RngCore) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(TAU * u2)
}

pub fn gaussian_vector(rng: &mut impl RngCore, d: usize) -> Vec<f64> {
    (0..d).map(|_| normal(rng)).collect()
}

pub fn unit_vector(rng: &mut impl RngCore, d: usize) -> Vec<f64> {
    loop {
        let mut v = gaussian_vector(rng, d);
        let n = linalg::norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// Uniform point in the closed ball of radius `r` around the origin.
pub fn in_ball(rng: &mut impl RngCore, d: usize, r: f64) -> Vec<f64> {
    let mut v = unit_vector(rng, d);
    let radius = r * libm::pow(uniform(rng), 1.0 / d as f64);
    v.iter_mut().for_each(|x| *x *= radius);
    v
}

/// Random orthogonal `d x d` matrix from Gram-Schmidt on a Gaussian matrix.
pub fn orthogonal_matrix(rng: &mut impl RngCore, d: usize) -> Matrix {
    loop {
        let cols: Vec<Vec<f64>> = (0..d).map(|_| gaussian_vector(rng, d)).collect();
        if let Ok(frame) = linalg::orthonormalize(&cols) {
            return frame.into_matrix();
        }
    }
}

/// Random frame with `k` orthonormal columns in R^d.
pub fn random_frame(rng: &mut impl RngCore, d: usize, k: usize) -> Frame {
    loop {
        let cols: Vec<Vec<f64>> = (0..k).map(|_| gaussian_vector(rng, d)).collect();
        if let Ok(frame) = linalg::orthonormalize(&cols) {
            return frame;
        }
    }
}

pub fn shuffle<T>(rng: &mut impl RngCore, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = index(rng, i + 1);
        items.swap(i, j);
    }
}

//! The compactly supported bump `h` and the normalized weights `omega(x, p)`.
//!
//! `h(s) = (1 - s/(m*gamma))^(2m) * (2s/gamma + 1)` on `[0, m*gamma]` and zero
//! beyond. It is once differentiable at the support boundary.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::sampling::SampleCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    m: usize,
    gamma: f64,
}

impl WeightParams {
    pub fn new(m: usize, gamma: f64) -> Result<Self> {
        if m == 0 {
            return Err(domain("intrinsic dimension must be at least 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(domain(format!("gamma must be positive and finite, got {gamma}")));
        }
        Ok(Self { m, gamma })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `m * gamma`
    pub fn support_radius(&self) -> f64 {
        self.m as f64 * self.gamma
    }
}

pub fn bump(s: f64, params: &WeightParams) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(domain(format!("bump needs a nonnegative distance, got {s}")));
    }
    Ok(bump_unchecked(s, params))
}

pub(crate) fn bump_unchecked(s: f64, params: &WeightParams) -> f64 {
    let radius = params.support_radius();
    if s >= radius {
        return 0.0;
    }
    let falloff = 1.0 - s / radius;
    libm::pow(falloff, (2 * params.m) as f64) * (2.0 * s / params.gamma + 1.0)
}

/// Normalizes bump values over `(index, distance)` pairs. All h values are
/// accumulated first and then divided by their sum.
pub fn normalize(neighbors: &[(usize, f64)], params: &WeightParams) -> Result<Vec<(usize, f64)>> {
    let raw: Vec<(usize, f64)> = neighbors
        .iter()
        .map(|&(i, s)| (i, bump_unchecked(s, params)))
        .filter(|&(_, h)| h > 0.0)
        .collect();
    let total: f64 = raw.iter().map(|(_, h)| h).sum();
    if raw.is_empty() || !(total > 0.0) {
        return Err(Error::OutOfSupport);
    }
    Ok(raw.into_iter().map(|(i, h)| (i, h / total)).collect())
}

/// `omega(x, p)` for every sample strictly inside the support radius of `x`,
/// ordered by sample index.
pub fn normalized_weights(x: &[f64], cloud: &SampleCloud) -> Result<Vec<(usize, f64)>> {
    if x.len() != cloud.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.ambient_dim(),
            found: x.len(),
        });
    }
    let params = cloud.weight_params();
    let neighbors: Vec<(usize, f64)> = cloud
        .neighbors(x)
        .into_iter()
        .map(|i| (i, linalg::distance(x, cloud.point(i))))
        .collect();
    normalize(&neighbors, &params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn bump_values() {
        let p = WeightParams::new(2, 0.1).unwrap();
        assert_eq!(bump(0.0, &p).unwrap(), 1.0);
        assert_eq!(bump(p.support_radius(), &p).unwrap(), 0.0);
        assert_eq!(bump(1.0, &p).unwrap(), 0.0);

        // (1 - 0.03/0.04)^2 * (2*0.03/0.04 + 1) = 0.25^2 * 2.5
        let p1 = WeightParams::new(1, 0.04).unwrap();
        let h = bump(0.03, &p1).unwrap();
        assert!((h - 0.15625).abs() < 1e-15);
        assert!(h > 0.06);
    }

    #[test]
    fn bump_rejects_negative_distance() {
        let p = WeightParams::new(1, 0.1).unwrap();
        assert!(matches!(bump(-1e-3, &p), Err(Error::Domain(_))));
        assert!(matches!(bump(f64::NAN, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn params_validated() {
        assert!(WeightParams::new(0, 0.1).is_err());
        assert!(WeightParams::new(1, 0.0).is_err());
        assert!(WeightParams::new(1, -0.1).is_err());
    }

    #[test]
    fn bump_is_nonincreasing() {
        for m in 1..=4 {
            let p = WeightParams::new(m, 0.04).unwrap();
            let r = p.support_radius();
            let n = 2000;
            let mut prev = f64::INFINITY;
            for k in 0..=n {
                let h = bump(r * k as f64 / n as f64, &p).unwrap();
                assert!(h <= prev, "m={m} k={k}");
                prev = h;
            }
        }
    }

    #[test]
    fn bump_vanishes_smoothly() {
        for m in 1..=4 {
            let p = WeightParams::new(m, 0.04).unwrap();
            let r = p.support_radius();
            let delta = 1e-3 * r;
            let h = bump(r - delta, &p).unwrap();
            // (delta/r)^(2m) * (2(r - delta)/gamma + 1) <= (delta/r)^(2m) * (2m + 1)
            let bound = libm::pow(delta / r, (2 * m) as f64) * (2 * m + 1) as f64;
            assert!(h <= bound * (1.0 + 1e-12), "m={m}");
            assert!(h > 0.0);
        }
    }

    #[test]
    fn normalization() {
        let p = WeightParams::new(1, 0.04).unwrap();
        assert_eq!(normalize(&[(3, 0.01)], &p).unwrap(), vec![(3, 1.0)]);
        assert_eq!(
            normalize(&[(1, 0.02), (4, 0.02)], &p).unwrap(),
            vec![(1, 0.5), (4, 0.5)]
        );
        assert_eq!(normalize(&[(0, 0.04), (1, 0.5)], &p), Err(Error::OutOfSupport));
        assert_eq!(normalize(&[], &p), Err(Error::OutOfSupport));
    }
}

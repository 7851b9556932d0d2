//! The implicit field `phi(x) = B^t (x - a_x)`.
//!
//! `C_x = sum_p omega(x, p) T_p T_p^t` is the weighted tangent covariance,
//! `B` spans its `d - m` least dominant eigenvectors (the approximate normal
//! space at `x`) and `a_x = sum_p omega(x, p) p` is the weighted centroid.
//! Outside the support of every sample the field is defined to be zero.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::linalg::{self, Frame, Matrix};
use crate::sampling::SampleCloud;
use crate::weights;

/// Spectral gaps below this are flagged as degenerate.
pub const DEGENERATE_GAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    InSupport,
    OutOfSupport,
}

/// Eigen-split of a tangent covariance into normal and tangent parts.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSplit {
    /// `d x (d - m)`, least dominant eigenvectors.
    pub normal: Frame,
    /// `d x m`, most dominant eigenvectors.
    pub tangent: Frame,
    /// All `d` eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// `lambda_{d-m+1} - lambda_{d-m}` in 1-based ascending order.
    pub spectral_gap: f64,
    /// Set when the gap is below [`DEGENERATE_GAP`].
    pub degenerate: bool,
}

/// Everything computed at an in-support query point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    pub split: NormalSplit,
    /// Weighted centroid `a_x`.
    pub centroid: Vec<f64>,
    /// `(sample index, omega)` pairs.
    pub weights: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub status: Support,
    /// `phi(x)`, a `(d - m)`-vector; zero out of support.
    pub phi: Vec<f64>,
    pub local: Option<LocalFit>,
}

impl EvalResult {
    pub fn residual(&self) -> f64 {
        linalg::norm(&self.phi)
    }

    pub fn in_support(&self) -> bool {
        self.status == Support::InSupport
    }

    pub fn normal_frame(&self) -> Option<&Frame> {
        self.local.as_ref().map(|l| &l.split.normal)
    }

    pub fn spectral_gap(&self) -> Option<f64> {
        self.local.as_ref().map(|l| l.split.spectral_gap)
    }
}

/// Samples with `|x - p| < m * gamma`, ascending by index.
pub fn neighbors(x: &[f64], cloud: &SampleCloud) -> Vec<usize> {
    cloud.neighbors(x)
}

fn covariance_from(weights: &[(usize, f64)], cloud: &SampleCloud) -> Matrix {
    let d = cloud.ambient_dim();
    let mut c = Matrix::zeros(d, d);
    for &(i, w) in weights {
        let t = cloud.frame(i).matrix();
        for r in 0..d {
            for s in 0..d {
                c[(r, s)] += w * linalg::dot(t.row(r), t.row(s));
            }
        }
    }
    c
}

/// `C_x = sum_p omega(x, p) T_p T_p^t`.
pub fn assemble_covariance(x: &[f64], cloud: &SampleCloud) -> Result<Matrix> {
    let w = weights::normalized_weights(x, cloud)?;
    Ok(covariance_from(&w, cloud))
}

/// Splits a symmetric `d x d` matrix into the `d - m` least dominant
/// eigenvectors (normal part) and the `m` most dominant ones.
pub fn local_normal_frame(c: &Matrix, m: usize) -> Result<NormalSplit> {
    let d = c.rows();
    if c.cols() != d || m == 0 || m >= d {
        return Err(domain(format!("need a square matrix with 1 <= m < d, got {}x{} and m = {m}", c.rows(), c.cols())));
    }
    let asym = c.asymmetry();
    if asym > 1e-12 * c.max_abs().max(1.0) {
        return Err(domain(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    let spectrum = linalg::sym_eig(c)?;
    let k = d - m;
    let spectral_gap = spectrum.eigenvalues[k] - spectrum.eigenvalues[k - 1];
    Ok(NormalSplit {
        normal: spectrum.least_dominant(k),
        tangent: spectrum.most_dominant(m),
        spectral_gap,
        degenerate: spectral_gap < DEGENERATE_GAP,
        eigenvalues: spectrum.eigenvalues,
    })
}

/// `B^t (x - a)` for an arbitrary basis `B` of the normal space.
pub fn field_with_basis(x: &[f64], centroid: &[f64], basis: &Frame) -> Vec<f64> {
    basis.coords(&linalg::sub(x, centroid))
}

/// Evaluates `phi` at `x`. Out of support is a status, not an error.
pub fn evaluate(x: &[f64], cloud: &SampleCloud) -> Result<EvalResult> {
    let (d, m) = (cloud.ambient_dim(), cloud.intrinsic_dim());
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.len() });
    }
    let weights = match weights::normalized_weights(x, cloud) {
        Ok(w) => w,
        Err(Error::OutOfSupport) => {
            return Ok(EvalResult { status: Support::OutOfSupport, phi: vec![0.0; d - m], local: None });
        }
        Err(e) => return Err(e),
    };
    let mut centroid = vec![0.0; d];
    for &(i, w) in &weights {
        linalg::axpy(&mut centroid, w, cloud.point(i));
    }
    let split = local_normal_frame(&covariance_from(&weights, cloud), m)?;
    let phi = field_with_basis(x, &centroid, &split.normal);
    Ok(EvalResult {
        status: Support::InSupport,
        phi,
        local: Some(LocalFit { split, centroid, weights }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::CloudMeta;

    fn cloud(points: Vec<Vec<f64>>, frames: Vec<Frame>, eps: f64) -> SampleCloud {
        let d = points[0].len();
        let m = frames[0].dim();
        SampleCloud::new(d, m, eps, points, frames, CloudMeta::default()).unwrap()
    }

    fn e(d: usize, i: usize) -> Frame {
        Frame::axes(d, &[i]).unwrap()
    }

    #[test]
    fn neighbor_sets() {
        // eps 0.01 -> m * gamma = 0.04
        let c = cloud(vec![vec![0.0, 0.0], vec![0.5, 0.0]], vec![e(2, 0), e(2, 0)], 0.01);
        assert_eq!(neighbors(&[0.0, 0.02], &c), vec![0]);
        assert!(neighbors(&[0.25, 0.3], &c).is_empty());
        assert!(neighbors(&[0.0, 0.04], &c).is_empty());
    }

    #[test]
    fn covariance_examples() {
        let c = cloud(vec![vec![0.0, 0.0]], vec![e(2, 0)], 0.01);
        let cov = assemble_covariance(&[0.0, 0.01], &c).unwrap();
        assert_eq!(cov, Matrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap());

        let c = cloud(vec![vec![-0.01, 0.0], vec![0.01, 0.0]], vec![e(2, 0), e(2, 1)], 0.01);
        let cov = assemble_covariance(&[0.0, 0.0], &c).unwrap();
        assert_eq!(cov, Matrix::identity(2).scaled(0.5));

        assert_eq!(assemble_covariance(&[1.0, 1.0], &c), Err(Error::OutOfSupport));
    }

    #[test]
    fn normal_split_examples() {
        let s = local_normal_frame(&Matrix::diagonal(&[0.0, 1.0]), 1).unwrap();
        assert_eq!(s.normal.column(0), vec![1.0, 0.0]);
        assert_eq!(s.spectral_gap, 1.0);
        assert!(!s.degenerate);

        let s = local_normal_frame(&Matrix::identity(2).scaled(0.5), 1).unwrap();
        assert!(s.spectral_gap.abs() < 1e-15);
        assert!(s.degenerate);

        let skew = Matrix::from_row_major(2, 2, vec![1.0, 0.5, 0.0, 1.0]).unwrap();
        assert!(matches!(local_normal_frame(&skew, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn one_sample_field() {
        let c = cloud(vec![vec![0.0, 0.0]], vec![e(2, 0)], 0.01);
        let r = evaluate(&[0.0, 0.01], &c).unwrap();
        assert_eq!(r.status, Support::InSupport);
        let local = r.local.as_ref().unwrap();
        assert_eq!(local.centroid, vec![0.0, 0.0]);
        assert!(linalg::subspace_angle(&local.split.normal, &e(2, 1)).unwrap() < 1e-15);
        assert!((r.residual() - 0.01).abs() < 1e-15);

        let at_centroid = evaluate(&[0.0, 0.0], &c).unwrap();
        assert_eq!(at_centroid.residual(), 0.0);
    }

    #[test]
    fn out_of_support_is_zero() {
        let c = cloud(vec![vec![0.0, 0.0, 0.0]], vec![e(3, 0)], 0.01);
        for x in [[0.0, 0.04, 0.0], [1.0, 2.0, 3.0]] {
            let r = evaluate(&x, &c).unwrap();
            assert_eq!(r.status, Support::OutOfSupport);
            assert_eq!(r.phi, vec![0.0, 0.0]);
            assert!(r.local.is_none());
        }
        assert!(matches!(evaluate(&[0.0, 0.0], &c), Err(Error::DimensionMismatch { .. })));
    }
}

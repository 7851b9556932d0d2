//! Iterative projection onto the zero set of the field.
//!
//! Each step moves `x` to the projection of the weighted centroid `a_x` onto
//! the affine subspace `x + col B`:
//!
//! ```text
//! x' = x + B B^t (a_x - x) = x - B phi(x)
//! ```
//!
//! Since `B` has orthonormal columns, `|x' - x| = |phi(x)|`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::field::{self, Support};
use crate::linalg;
use crate::sampling::SampleCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    pub max_iters: usize,
    pub step_tol: f64,
    pub residual_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { max_iters: 100, step_tol: 1e-12, residual_tol: 1e-11 }
    }
}

impl ProjectionOptions {
    fn validate(&self) -> Result<()> {
        if !(self.step_tol > 0.0 && self.residual_tol > 0.0) {
            return Err(domain("projection tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionStatus {
    Converged,
    MaxIters,
    LeftSupport,
}

impl ProjectionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProjectionStatus::Converged => "Converged",
            ProjectionStatus::MaxIters => "MaxIters",
            ProjectionStatus::LeftSupport => "LeftSupport",
        }
    }
}

/// Iterates `x_0 .. x_k` with `residuals[i] = |phi(x_i)|`. Both lists have
/// the same length; an iterate that left the support records residual 0
/// (the field vanishes there) and ends the trace with `LeftSupport`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTrace {
    pub iterates: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub status: ProjectionStatus,
}

impl ProjectionTrace {
    pub fn limit(&self) -> &[f64] {
        self.iterates.last().expect("a trace holds at least the start point")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("a trace holds at least one residual")
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn converged(&self) -> bool {
        self.status == ProjectionStatus::Converged
    }
}

/// One projection step.
pub fn step(x: &[f64], cloud: &SampleCloud) -> Result<Vec<f64>> {
    let eval = field::evaluate(x, cloud)?;
    if eval.status == Support::OutOfSupport {
        return Err(Error::LeftSupport);
    }
    let b = eval.normal_frame().expect("in-support evaluation has a frame");
    Ok(linalg::sub(x, &b.matrix().mul_vec(&eval.phi)))
}

/// Runs the projection from `x0` until the residual drops to
/// `residual_tol`, a step shrinks to `step_tol`, or `max_iters` steps were
/// taken. `x0` must have a sample strictly within `m * gamma`.
pub fn project(x0: &[f64], cloud: &SampleCloud, opts: &ProjectionOptions) -> Result<ProjectionTrace> {
    opts.validate()?;
    if x0.len() != cloud.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: cloud.ambient_dim(), found: x0.len() });
    }
    if cloud.neighbors(x0).is_empty() {
        return Err(domain(format!(
            "start point has no sample within the support radius {}",
            cloud.support_radius()
        )));
    }
    let mut iterates = alloc::vec![x0.to_vec()];
    let mut residuals = Vec::new();
    let mut last_step = f64::INFINITY;
    loop {
        let x = iterates.last().expect("non-empty");
        let eval = field::evaluate(x, cloud)?;
        if eval.status == Support::OutOfSupport {
            residuals.push(0.0);
            return Ok(ProjectionTrace { iterates, residuals, status: ProjectionStatus::LeftSupport });
        }
        let residual = eval.residual();
        residuals.push(residual);
        if residual <= opts.residual_tol || last_step <= opts.step_tol {
            return Ok(ProjectionTrace { iterates, residuals, status: ProjectionStatus::Converged });
        }
        if iterates.len() > opts.max_iters {
            return Ok(ProjectionTrace { iterates, residuals, status: ProjectionStatus::MaxIters });
        }
        let b = eval.normal_frame().expect("in-support evaluation has a frame");
        let next = linalg::sub(x, &b.matrix().mul_vec(&eval.phi));
        last_step = linalg::distance(&next, x);
        iterates.push(next);
    }
}

/// Geometric mean of successive residual ratios `r_{i+1} / r_i` over the
/// leading run of residuals above `residual_tol`, skipping the first step.
/// Needs at least three such residuals.
pub fn contraction_factor(trace: &ProjectionTrace, residual_tol: f64) -> Result<f64> {
    let run = trace.residuals.iter().take_while(|&&r| r > residual_tol).count();
    if run < 3 {
        return Err(Error::InsufficientData(format!(
            "need 3 residuals above tolerance, have {run}"
        )));
    }
    let tail = &trace.residuals[1..run];
    let log_sum: f64 = tail.windows(2).map(|w| libm::log(w[1] / w[0])).sum();
    Ok(libm::exp(log_sum / (tail.len() - 1) as f64))
}

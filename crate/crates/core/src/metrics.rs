//! Empirical fidelity of the reconstruction against a known manifold:
//! normal-space error of the field, directed Hausdorff estimates between `M`
//! and the zero set, landing offsets of the projector and its convergence
//! rate.
//!
//! All test points are drawn from the cloud's parameter region, pulled in
//! from any patch boundary so that every query sees a complete neighborhood.

use alloc::format;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{domain, Error, Result};
use crate::field;
use crate::linalg;
use crate::manifold::SyntheticManifold;
use crate::projector::{self, ProjectionOptions, ProjectionTrace};
use crate::rng::{self, SeededRng, Stream};
use crate::sampling::{Region, SampleCloud};

/// Seeds that fail to converge beyond this fraction trigger a reliability
/// warning.
pub const RELIABILITY_FRACTION: f64 = 0.01;

fn check_pair(cloud: &SampleCloud, manifold: &SyntheticManifold) -> Result<()> {
    if cloud.ambient_dim() != manifold.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: manifold.ambient_dim(), found: cloud.ambient_dim() });
    }
    if cloud.intrinsic_dim() != manifold.intrinsic_dim() {
        return Err(Error::DimensionMismatch {
            expected: manifold.intrinsic_dim(),
            found: cloud.intrinsic_dim(),
        });
    }
    Ok(())
}

/// Parameter box test points are drawn from.
pub fn test_region(cloud: &SampleCloud, manifold: &SyntheticManifold) -> Result<Region> {
    match cloud.region() {
        Some(r) if !r.is_full(manifold) => r.shrink(manifold, 2.0 * cloud.support_radius() + 2.0 * cloud.eps()),
        _ => Ok(Region::full(manifold)),
    }
}

fn random_manifold_point(manifold: &SyntheticManifold, region: &Region, rng: &mut SeededRng) -> Result<Vec<f64>> {
    manifold.embed(&region.sample(rng))
}

/// Random point within `offset` of `z` along the normal space at `z`.
fn offset_point(manifold: &SyntheticManifold, z: &[f64], offset: f64, rng: &mut impl RngCore) -> Result<Vec<f64>> {
    let normal = manifold.normal_frame(z)?;
    let dir = normal.matrix().mul_vec(&rng::unit_vector(rng, normal.dim()));
    let r = rng::uniform_in(rng, 0.0, offset);
    Ok(linalg::add(z, &linalg::scale(&dir, r)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleStats {
    pub max: f64,
    pub mean: f64,
    pub evaluated: usize,
    /// Test points that fell outside the support.
    pub excluded: usize,
}

/// Angle between the field's normal space at `x` and the true normal space
/// at `nu(x)`, over `n_points` random `x` within `offset` of `M`.
pub fn normal_angle_error(
    cloud: &SampleCloud,
    manifold: &SyntheticManifold,
    n_points: usize,
    offset: f64,
    seed: u64,
) -> Result<AngleStats> {
    check_pair(cloud, manifold)?;
    if !(0.0..=cloud.eps()).contains(&offset) {
        return Err(domain(format!("offset must lie in [0, eps], got {offset}")));
    }
    let region = test_region(cloud, manifold)?;
    let mut rng = rng::seeded(seed, Stream::Metrics);
    let (mut max, mut sum, mut evaluated, mut excluded) = (0.0f64, 0.0, 0, 0);
    for _ in 0..n_points {
        let z = random_manifold_point(manifold, &region, &mut rng)?;
        let x = offset_point(manifold, &z, offset, &mut rng)?;
        let eval = field::evaluate(&x, cloud)?;
        let Some(b) = eval.normal_frame() else {
            excluded += 1;
            continue;
        };
        let truth = manifold.normal_frame(&manifold.nearest_point(&x)?)?;
        let angle = linalg::subspace_angle(b, &truth)?;
        max = max.max(angle);
        sum += angle;
        evaluated += 1;
    }
    let mean = if evaluated > 0 { sum / evaluated as f64 } else { 0.0 };
    Ok(AngleStats { max, mean, evaluated, excluded })
}

/// A seed point on `M` and the outcome of projecting it.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: Vec<f64>,
    pub trace: Option<ProjectionTrace>,
}

impl SeedRun {
    pub fn converged(&self) -> Option<&ProjectionTrace> {
        self.trace.as_ref().filter(|t| t.converged())
    }
}

/// Projects `n` random points of `M`. A seed outside the support has no
/// trace.
pub fn project_manifold_points(
    cloud: &SampleCloud,
    manifold: &SyntheticManifold,
    n: usize,
    rng: &mut SeededRng,
    opts: &ProjectionOptions,
) -> Result<Vec<SeedRun>> {
    check_pair(cloud, manifold)?;
    let region = test_region(cloud, manifold)?;
    (0..n)
        .map(|_| {
            let z = random_manifold_point(manifold, &region, rng)?;
            let trace = match projector::project(&z, cloud, opts) {
                Ok(t) => Some(t),
                Err(Error::Domain(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(SeedRun { seed: z, trace })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HausdorffEstimate {
    /// Max over seeds `z` on `M` of `|lim - z|`; bounds `dist(z, Z_phi)`.
    pub manifold_to_zero: f64,
    /// Max over converged limits `y` of `|y - nu(y)|`.
    pub zero_to_manifold: f64,
    pub converged: usize,
    pub non_converged: usize,
    pub reliability_warning: bool,
}

fn hausdorff_from(runs: &[SeedRun], manifold: &SyntheticManifold) -> Result<HausdorffEstimate> {
    let (mut to_zero, mut to_manifold, mut converged) = (0.0f64, 0.0f64, 0);
    for run in runs {
        if let Some(t) = run.converged() {
            to_zero = to_zero.max(linalg::distance(t.limit(), &run.seed));
            to_manifold = to_manifold.max(manifold.distance_to(t.limit())?);
            converged += 1;
        }
    }
    let non_converged = runs.len() - converged;
    Ok(HausdorffEstimate {
        manifold_to_zero: to_zero,
        zero_to_manifold: to_manifold,
        converged,
        non_converged,
        reliability_warning: non_converged as f64 > RELIABILITY_FRACTION * runs.len() as f64,
    })
}

/// Directed Hausdorff upper estimates between `M` and the zero set, from the
/// projector limits of `n_seeds` random points of `M`.
pub fn hausdorff_upper(
    cloud: &SampleCloud,
    manifold: &SyntheticManifold,
    n_seeds: usize,
    seed: u64,
    opts: &ProjectionOptions,
) -> Result<HausdorffEstimate> {
    if n_seeds == 0 {
        return Err(domain("need at least one seed"));
    }
    let mut rng = rng::seeded(seed, Stream::Metrics);
    let runs = project_manifold_points(cloud, manifold, n_seeds, &mut rng, opts)?;
    hausdorff_from(&runs, manifold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroOffsets {
    /// `|lim - z|` per converged point.
    pub offsets: Vec<f64>,
    pub max: f64,
    pub excluded: usize,
}

/// How far the projector lands from each of `n_points` random points of `M`.
pub fn zero_offset(
    cloud: &SampleCloud,
    manifold: &SyntheticManifold,
    n_points: usize,
    seed: u64,
    opts: &ProjectionOptions,
) -> Result<ZeroOffsets> {
    let mut rng = rng::seeded(seed, Stream::Metrics);
    let runs = project_manifold_points(cloud, manifold, n_points, &mut rng, opts)?;
    let offsets: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.converged().map(|t| linalg::distance(t.limit(), &r.seed)))
        .collect();
    let max = offsets.iter().copied().fold(0.0, f64::max);
    Ok(ZeroOffsets { excluded: runs.len() - offsets.len(), offsets, max })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `None` when no trace has enough residuals above tolerance.
    pub median_contraction: Option<f64>,
    /// Traces that contributed a contraction factor.
    pub measured: usize,
    pub max_iterations: usize,
    /// Traces that did not converge.
    pub failures: usize,
}

pub fn convergence_report(traces: &[ProjectionTrace], residual_tol: f64) -> ConvergenceReport {
    let mut factors: Vec<f64> = traces
        .iter()
        .filter_map(|t| projector::contraction_factor(t, residual_tol).ok())
        .collect();
    factors.sort_by(f64::total_cmp);
    let median_contraction = match factors.len() {
        0 => None,
        n if n % 2 == 1 => Some(factors[n / 2]),
        n => Some(0.5 * (factors[n / 2 - 1] + factors[n / 2])),
    };
    ConvergenceReport {
        median_contraction,
        measured: factors.len(),
        max_iterations: traces.iter().map(ProjectionTrace::iterations).max().unwrap_or(0),
        failures: traces.iter().filter(|t| !t.converged()).count(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityReport {
    pub n_points: usize,
    pub min_seed_distance: f64,
    pub min_limit_distance: f64,
    pub non_converged: usize,
}

/// Projects `n_points` points of `M` that are pairwise at least
/// `separation` apart and reports the closest pair of limits.
pub fn injectivity_check(
    cloud: &SampleCloud,
    manifold: &SyntheticManifold,
    n_points: usize,
    separation: f64,
    seed: u64,
    opts: &ProjectionOptions,
) -> Result<InjectivityReport> {
    check_pair(cloud, manifold)?;
    let region = test_region(cloud, manifold)?;
    let mut rng = rng::seeded(seed, Stream::Metrics);
    let mut seeds: Vec<Vec<f64>> = Vec::with_capacity(n_points);
    let mut attempts = 0;
    while seeds.len() < n_points {
        attempts += 1;
        if attempts > 1000 * n_points.max(1) {
            return Err(domain("could not place that many separated points"));
        }
        let z = random_manifold_point(manifold, &region, &mut rng)?;
        if seeds.iter().all(|s| linalg::distance(s, &z) >= separation) {
            seeds.push(z);
        }
    }
    let mut limits = Vec::with_capacity(n_points);
    let mut non_converged = 0;
    for z in &seeds {
        match projector::project(z, cloud, opts) {
            Ok(t) if t.converged() => limits.push(t.limit().to_vec()),
            Ok(_) | Err(Error::Domain(_)) => non_converged += 1,
            Err(e) => return Err(e),
        }
    }
    let min_pair = |pts: &[Vec<f64>]| {
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.min(linalg::distance(&pts[i], &pts[j]));
            }
        }
        best
    };
    Ok(InjectivityReport {
        n_points,
        min_seed_distance: min_pair(&seeds),
        min_limit_distance: min_pair(&limits),
        non_converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityConfig {
    pub n_points: usize,
    pub n_seeds: usize,
    /// Normal offset of the angle test points; defaults to eps.
    pub offset: Option<f64>,
    pub seed: u64,
    pub projection: ProjectionOptions,
}

impl Default for FidelityConfig {
    fn default() -> Self {
        Self { n_points: 200, n_seeds: 100, offset: None, seed: 0, projection: ProjectionOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub eps: f64,
    pub max_normal_angle: f64,
    pub mean_normal_angle: f64,
    pub hausdorff_m_to_z: f64,
    pub hausdorff_z_to_m: f64,
    pub zero_offset_max: f64,
    pub contraction_median: Option<f64>,
    pub n_test_points: usize,
    pub n_seeds: usize,
    pub excluded_points: usize,
    pub non_converged: usize,
    pub max_iterations: usize,
    pub reliability_warning: bool,
}

/// Runs the whole suite. The Hausdorff seeds and the zero-offset points are
/// drawn independently.
pub fn fidelity_report(cloud: &SampleCloud, manifold: &SyntheticManifold, config: &FidelityConfig) -> Result<FidelityReport> {
    if config.n_points == 0 || config.n_seeds == 0 {
        return Err(domain("n_points and n_seeds must be positive"));
    }
    let angles = normal_angle_error(cloud, manifold, config.n_points, config.offset.unwrap_or(cloud.eps()), config.seed)?;

    let mut rng = rng::seeded(config.seed, Stream::Metrics);
    rng.set_word_pos(1 << 40);
    let runs = project_manifold_points(cloud, manifold, config.n_seeds, &mut rng, &config.projection)?;
    let hausdorff = hausdorff_from(&runs, manifold)?;
    let traces: Vec<ProjectionTrace> = runs.iter().filter_map(|r| r.trace.clone()).collect();
    let convergence = convergence_report(&traces, config.projection.residual_tol);

    rng.set_word_pos(2 << 40);
    let offset_runs = project_manifold_points(cloud, manifold, config.n_points, &mut rng, &config.projection)?;
    let zero_offset_max = offset_runs
        .iter()
        .filter_map(|r| r.converged().map(|t| linalg::distance(t.limit(), &r.seed)))
        .fold(0.0, f64::max);

    Ok(FidelityReport {
        eps: cloud.eps(),
        max_normal_angle: angles.max,
        mean_normal_angle: angles.mean,
        hausdorff_m_to_z: hausdorff.manifold_to_zero,
        hausdorff_z_to_m: hausdorff.zero_to_manifold,
        zero_offset_max,
        contraction_median: convergence.median_contraction,
        n_test_points: angles.evaluated,
        n_seeds: config.n_seeds,
        excluded_points: angles.excluded,
        non_converged: hausdorff.non_converged,
        max_iterations: convergence.max_iterations,
        reliability_warning: hausdorff.reliability_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Frame;
    use crate::projector::ProjectionStatus;
    use crate::sampling::{generate_sample, CloudMeta, SampleOptions};
    use alloc::vec;

    /// Exact samples of the x-axis in R^2.
    fn flat_line_cloud() -> SampleCloud {
        let points: Vec<Vec<f64>> = (-100..=100).map(|i| vec![0.005 * i as f64, 0.0]).collect();
        let frames = vec![Frame::axes(2, &[0]).unwrap(); points.len()];
        SampleCloud::new(2, 1, 0.01, points, frames, CloudMeta::default()).unwrap()
    }

    #[test]
    fn flat_samples_reproduce_the_line() {
        let cloud = flat_line_cloud();
        let line = Frame::axes(2, &[1]).unwrap();
        for k in 0..50 {
            let x = [-0.3 + 0.012 * k as f64, 0.008 * ((k % 5) as f64 - 2.0)];
            let eval = field::evaluate(&x, &cloud).unwrap();
            assert!(linalg::subspace_angle(eval.normal_frame().unwrap(), &line).unwrap() <= 1e-8);
            let t = projector::project(&x, &cloud, &ProjectionOptions::default()).unwrap();
            assert_eq!(t.status, ProjectionStatus::Converged);
            assert!(t.limit()[1].abs() <= 1e-8);
            assert!((t.limit()[0] - x[0]).abs() <= 1e-8);
        }
    }

    #[test]
    fn convergence_report_without_data() {
        let t = ProjectionTrace { iterates: vec![vec![0.0]], residuals: vec![0.0], status: ProjectionStatus::Converged };
        let r = convergence_report(&[t.clone(), t], 1e-11);
        assert_eq!(r.median_contraction, None);
        assert_eq!((r.max_iterations, r.failures, r.measured), (0, 0, 0));
    }

    #[test]
    fn circle_report_is_populated() {
        let m = SyntheticManifold::circle(1.0, 2).unwrap();
        let cloud = generate_sample(&m, 0.02, &SampleOptions { seed: 3, ..Default::default() }).unwrap().cloud;
        let config = FidelityConfig { n_points: 30, n_seeds: 20, seed: 1, ..Default::default() };
        let r = fidelity_report(&cloud, &m, &config).unwrap();
        assert_eq!(r.n_test_points, 30);
        assert_eq!(r.non_converged, 0);
        assert!(r.max_normal_angle > 0.0 && r.max_normal_angle < 0.5);
        assert!(r.hausdorff_z_to_m > 0.0 && r.hausdorff_z_to_m < 10.0 * cloud.gamma() * cloud.gamma());
        assert_eq!(r, fidelity_report(&cloud, &m, &config).unwrap());
        assert!(fidelity_report(&cloud, &m, &FidelityConfig { n_seeds: 0, ..config.clone() }).is_err());

        let sphere = SyntheticManifold::sphere(1.0).unwrap();
        assert!(matches!(fidelity_report(&cloud, &sphere, &config), Err(Error::DimensionMismatch { .. })));
    }
}

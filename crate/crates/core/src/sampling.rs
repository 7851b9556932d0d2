//! Uniform samples of synthetic manifolds with attached tangent frames.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use crate::error::{domain, Error, Result};
use crate::grid::GridIndex;
use crate::linalg::{self, Frame, Matrix};
use crate::manifold::{ParamRange, SyntheticManifold};
use crate::rng::{self, Stream};
use crate::weights::WeightParams;

/// Largest candidate grid the generator will enumerate.
const MAX_CANDIDATES: usize = 20_000_000;

/// How the tangent frames of a cloud were obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameMode {
    Exact,
    /// Exact frames rotated by independent angles in `[0, max_angle]`.
    Perturbed { max_angle: f64 },
    /// Local PCA over samples within `radius`.
    Pca { radius: f64 },
}

/// Axis-aligned box in parameter space, one `(lo, hi)` pair per intrinsic
/// dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    bounds: Vec<(f64, f64)>,
}

impl Region {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(domain("region needs at least one parameter range"));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(domain(format!("invalid parameter range [{lo}, {hi}]")));
            }
        }
        Ok(Self { bounds })
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// The full parameter domain of `manifold`.
    pub fn full(manifold: &SyntheticManifold) -> Self {
        Self {
            bounds: manifold.param_domain().iter().map(|p| (p.lo, p.hi)).collect(),
        }
    }

    fn validate_for(&self, manifold: &SyntheticManifold) -> Result<()> {
        let domain_ranges = manifold.param_domain();
        if self.bounds.len() != domain_ranges.len() {
            return Err(domain(format!(
                "region has {} ranges, {} needs {}",
                self.bounds.len(),
                manifold.kind(),
                domain_ranges.len()
            )));
        }
        for (&(lo, hi), p) in self.bounds.iter().zip(&domain_ranges) {
            let ok = if p.periodic {
                hi - lo <= p.hi - p.lo + 1e-12
            } else {
                lo >= p.lo - 1e-12 && hi <= p.hi + 1e-12
            };
            if !ok {
                return Err(domain(format!("parameter range [{lo}, {hi}] exceeds the domain")));
            }
        }
        Ok(())
    }

    /// Whether each side of each range is a real edge of the sampled patch
    /// (as opposed to a wrap-around or a pole).
    fn open_sides(&self, manifold: &SyntheticManifold) -> Vec<(bool, bool)> {
        self.bounds
            .iter()
            .zip(manifold.param_domain())
            .map(|(&(lo, hi), p): (&(f64, f64), ParamRange)| {
                if p.periodic {
                    let full = hi - lo >= p.hi - p.lo - 1e-12;
                    (!full, !full)
                } else {
                    (lo > p.lo + 1e-12, hi < p.hi - 1e-12)
                }
            })
            .collect()
    }

    /// Whether the region covers the whole closed manifold.
    pub fn is_full(&self, manifold: &SyntheticManifold) -> bool {
        self.open_sides(manifold).iter().all(|&(a, b)| !a && !b)
    }

    /// Pulls every patch edge inward so that points of the result are at
    /// least `margin` (ambient distance, measured along the manifold) away
    /// from the patch boundary.
    pub fn shrink(&self, manifold: &SyntheticManifold, margin: f64) -> Result<Self> {
        let speeds = manifold.speed_bounds(&self.bounds);
        let sides = self.open_sides(manifold);
        let mut bounds = Vec::with_capacity(self.bounds.len());
        for ((&(lo, hi), &(slow, _)), (open_lo, open_hi)) in self.bounds.iter().zip(&speeds).zip(sides) {
            let pad = if slow > 0.0 { margin / slow } else { f64::INFINITY };
            let lo2 = if open_lo { lo + pad } else { lo };
            let hi2 = if open_hi { hi - pad } else { hi };
            if !(lo2 < hi2) {
                return Err(domain("region is too small for the requested margin"));
            }
            bounds.push((lo2, hi2));
        }
        Ok(Self { bounds })
    }

    /// Uniform parameter vector inside the box.
    pub fn sample(&self, rng: &mut impl rand_core::RngCore) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| rng::uniform_in(rng, lo, hi)).collect()
    }
}

/// Metadata carried by a cloud besides its points and frames.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudMeta {
    pub kappa_measured: usize,
    pub frame_mode: FrameMode,
    pub seed: u64,
    /// Parameter box the sample covers; `None` for a whole closed manifold.
    pub region: Option<Region>,
}

impl Default for CloudMeta {
    fn default() -> Self {
        Self {
            kappa_measured: 1,
            frame_mode: FrameMode::Exact,
            seed: 0,
            region: None,
        }
    }
}

/// A point sample `P` of an m-manifold in R^d with one approximate tangent
/// frame per point. The neighborhood radius is always `gamma = 4 eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    d: usize,
    m: usize,
    eps: f64,
    gamma: f64,
    points: Vec<f64>,
    frames: Vec<Frame>,
    meta: CloudMeta,
    index: GridIndex,
}

impl SampleCloud {
    pub fn new(d: usize, m: usize, eps: f64, points: Vec<Vec<f64>>, frames: Vec<Frame>, meta: CloudMeta) -> Result<Self> {
        if m == 0 || m >= d {
            return Err(domain(format!("need 1 <= m < d, got m = {m}, d = {d}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(domain(format!("eps must be positive, got {eps}")));
        }
        if points.len() != frames.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: frames.len(),
            });
        }
        let mut flat = Vec::with_capacity(points.len() * d);
        for p in &points {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(domain("sample point has non-finite coordinates"));
            }
            flat.extend_from_slice(p);
        }
        for f in &frames {
            if f.ambient_dim() != d || f.dim() != m {
                return Err(domain(format!(
                    "tangent frame must be {d}x{m}, got {}x{}",
                    f.ambient_dim(),
                    f.dim()
                )));
            }
        }
        let gamma = 4.0 * eps;
        let index = GridIndex::build(d, m as f64 * gamma, &flat);
        Ok(Self { d, m, eps, gamma, points: flat, frames, meta, index })
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.m
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn support_radius(&self) -> f64 {
        self.m as f64 * self.gamma
    }

    pub fn weight_params(&self) -> WeightParams {
        WeightParams::new(self.m, self.gamma).expect("validated at construction")
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.d)
    }

    /// Row-major `n x d` coordinates.
    pub fn flat_points(&self) -> &[f64] {
        &self.points
    }

    pub fn frame(&self, i: usize) -> &Frame {
        &self.frames[i]
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn meta(&self) -> &CloudMeta {
        &self.meta
    }

    pub fn kappa_measured(&self) -> usize {
        self.meta.kappa_measured
    }

    pub fn frame_mode(&self) -> FrameMode {
        self.meta.frame_mode
    }

    pub fn seed(&self) -> u64 {
        self.meta.seed
    }

    pub fn region(&self) -> Option<&Region> {
        self.meta.region.as_ref()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.meta.seed = seed;
        self
    }

    /// Samples with `|x - p| < m * gamma`, in index order.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        self.within(x, self.support_radius(), false)
    }

    /// Samples with `|x - p| < radius` (or `<=` when `inclusive`).
    pub fn within(&self, x: &[f64], radius: f64, inclusive: bool) -> Vec<usize> {
        if x.len() != self.d {
            return Vec::new();
        }
        self.index.query(&self.points, self.d, x, radius, inclusive)
    }

    /// The cloud restricted to the listed samples, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let points = indices.iter().map(|&i| self.point(i).to_vec()).collect();
        let frames = indices.iter().map(|&i| self.frames[i].clone()).collect();
        Self::new(self.d, self.m, self.eps, points, frames, self.meta.clone())
    }

    /// Replaces all frames.
    pub fn with_frames(&self, frames: Vec<Frame>, mode: FrameMode) -> Result<Self> {
        let points = self.points().map(<[f64]>::to_vec).collect();
        let meta = CloudMeta { frame_mode: mode, ..self.meta.clone() };
        Self::new(self.d, self.m, self.eps, points, frames, meta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOptions {
    pub seed: u64,
    /// Restrict sampling to a parameter box (a patch of the manifold).
    pub region: Option<Region>,
    /// Centers used to measure kappa.
    pub kappa_centers: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { seed: 0, region: None, kappa_centers: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleWarning {
    /// Too few points for the intrinsic dimension; the sample is unlikely to
    /// resolve the manifold.
    DegenerateSample,
}

#[derive(Debug, Clone)]
pub struct GeneratedSample {
    pub cloud: SampleCloud,
    /// Test-grid points that were not covered by the Poisson-disk pass and
    /// were inserted as extra samples.
    pub densified: usize,
    pub warnings: Vec<SampleWarning>,
}

/// Parameter grid whose cells have ambient diameter at most `spacing`.
struct ParamGrid {
    lo: Vec<f64>,
    step: Vec<f64>,
    counts: Vec<usize>,
}

impl ParamGrid {
    fn new(manifold: &SyntheticManifold, region: &Region, spacing: f64, min_total: usize) -> Result<Self> {
        let m = region.bounds().len();
        let speeds = manifold.speed_bounds(region.bounds());
        let per_axis = spacing / libm::sqrt(m as f64);
        let floor = libm::ceil(libm::pow(min_total as f64, 1.0 / m as f64)) as usize;
        let mut counts = Vec::with_capacity(m);
        let mut step = Vec::with_capacity(m);
        let mut lo = Vec::with_capacity(m);
        for (&(a, b), &(_, fast)) in region.bounds().iter().zip(&speeds) {
            let len = b - a;
            let n = (libm::ceil(len * fast / per_axis) as usize).max(floor).max(1);
            counts.push(n);
            step.push(len / n as f64);
            lo.push(a);
        }
        let total = counts.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        match total {
            Some(t) if t <= MAX_CANDIDATES => Ok(Self { lo, step, counts }),
            _ => Err(domain("region is too large for this eps; sample a smaller patch")),
        }
    }

    fn len(&self) -> usize {
        self.counts.iter().product()
    }

    /// Parameters of cell `flat`, offset inside the cell by `frac` in [0, 1).
    fn params(&self, mut flat: usize, frac: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.counts.len());
        for (k, &n) in self.counts.iter().enumerate() {
            let i = flat % n;
            flat /= n;
            u.push(self.lo[k] + (i as f64 + frac(k)) * self.step[k]);
        }
        u
    }
}

/// Generates an eps-dense sample with pairwise separation at least `eps/2`
/// and exact tangent frames.
///
/// Candidates are jittered parameter-grid points with ambient spacing below
/// `eps/4`, visited in random order; a candidate is accepted when no accepted
/// sample is closer than `eps/2`. A deterministic test grid is then checked
/// for eps-coverage and any uncovered grid point becomes a sample.
pub fn generate_sample(manifold: &SyntheticManifold, eps: f64, opts: &SampleOptions) -> Result<GeneratedSample> {
    if !(eps > 0.0 && eps <= 0.25 * manifold.reach()) {
        return Err(domain(format!("eps must lie in (0, 0.25 * reach], got {eps}")));
    }
    let region = match &opts.region {
        Some(r) => {
            r.validate_for(manifold)?;
            r.clone()
        }
        None => Region::full(manifold),
    };
    let d = manifold.ambient_dim();
    let m = manifold.intrinsic_dim();
    let separation = 0.5 * eps;

    let mut rng = rng::seeded(opts.seed, Stream::Sampling);
    let candidates = ParamGrid::new(manifold, &region, 0.25 * eps, 1)?;
    let mut order: Vec<u32> = (0..candidates.len() as u32).collect();
    rng::shuffle(&mut rng, &mut order);

    let mut points: Vec<f64> = Vec::new();
    let mut index = GridIndex::new(d, separation);
    for &cell in &order {
        let jitter: Vec<f64> = (0..m).map(|_| rng::uniform(&mut rng)).collect();
        let x = manifold.embed(&candidates.params(cell as usize, |k| jitter[k]))?;
        if !index.any_within(&points, d, &x, separation, false) {
            index.insert(points.len() / d, &x);
            points.extend_from_slice(&x);
        }
    }

    let test_grid = ParamGrid::new(manifold, &region, 0.25 * eps, 10_000 * m)?;
    let mut densified = 0;
    for cell in 0..test_grid.len() {
        let x = manifold.embed(&test_grid.params(cell, |_| 0.5))?;
        if !index.any_within(&points, d, &x, eps, true) {
            index.insert(points.len() / d, &x);
            points.extend_from_slice(&x);
            densified += 1;
        }
    }

    let pts: Vec<Vec<f64>> = points.chunks_exact(d).map(<[f64]>::to_vec).collect();
    let frames = pts.iter().map(|p| manifold.tangent_frame(p)).collect::<Result<Vec<_>>>()?;
    let kappa = measure_kappa(&points, d, &index, eps, opts.kappa_centers, opts.seed);
    let meta = CloudMeta {
        kappa_measured: kappa,
        frame_mode: FrameMode::Exact,
        seed: opts.seed,
        region: opts.region.clone(),
    };
    let cloud = SampleCloud::new(d, m, eps, pts, frames, meta)?;
    let mut warnings = Vec::new();
    if cloud.len() < m + 1 {
        warnings.push(SampleWarning::DegenerateSample);
    }
    Ok(GeneratedSample { cloud, densified, warnings })
}

/// Largest number of samples in a closed eps-ball around `n_centers` random
/// centers (a random sample displaced uniformly within eps). At least 1.
fn measure_kappa(points: &[f64], d: usize, index: &GridIndex, eps: f64, n_centers: usize, seed: u64) -> usize {
    let n = points.len() / d;
    if n == 0 {
        return 1;
    }
    let mut rng = rng::seeded(seed, Stream::Kappa);
    let mut kappa = 1;
    for _ in 0..n_centers {
        let p = &points[rng::index(&mut rng, n) * d..][..d];
        let c = linalg::add(p, &rng::in_ball(&mut rng, d, eps));
        kappa = kappa.max(index.query(points, d, &c, eps, true).len());
    }
    kappa
}

/// Number of points of a deterministic test grid over the cloud's region
/// that have no sample within `eps`.
pub fn density_gaps(cloud: &SampleCloud, manifold: &SyntheticManifold) -> Result<usize> {
    let region = cloud.region().cloned().unwrap_or_else(|| Region::full(manifold));
    let grid = ParamGrid::new(manifold, &region, 0.25 * cloud.eps(), 10_000 * cloud.intrinsic_dim())?;
    let mut gaps = 0;
    for cell in 0..grid.len() {
        let x = manifold.embed(&grid.params(cell, |_| 0.5))?;
        if cloud.within(&x, cloud.eps(), true).is_empty() {
            gaps += 1;
        }
    }
    Ok(gaps)
}

/// Rotates every frame by an independent angle drawn uniformly from
/// `[0, max_angle]`, within a random plane spanned by one tangent and one
/// normal direction. The angle to the original frame is exactly the drawn
/// angle. Randomness comes from the cloud seed.
pub fn perturb_frames(cloud: &SampleCloud, max_angle: f64) -> Result<SampleCloud> {
    if !(0.0..FRAC_PI_4).contains(&max_angle) {
        return Err(domain(format!("max_angle must lie in [0, pi/4), got {max_angle}")));
    }
    let mode = FrameMode::Perturbed { max_angle };
    if max_angle == 0.0 {
        return cloud.with_frames(cloud.frames().to_vec(), mode);
    }
    let (d, m) = (cloud.ambient_dim(), cloud.intrinsic_dim());
    let mut rng = rng::seeded(cloud.seed(), Stream::Perturb);
    let mut frames = Vec::with_capacity(cloud.len());
    for frame in cloud.frames() {
        let theta = rng::uniform_in(&mut rng, 0.0, max_angle);
        let t = frame.matrix().mul_vec(&rng::unit_vector(&mut rng, m));
        let n = loop {
            let g = rng::gaussian_vector(&mut rng, d);
            let r = linalg::sub(&g, &frame.project(&g));
            let len = linalg::norm(&r);
            if len > 1e-6 {
                break linalg::scale(&r, 1.0 / len);
            }
        };
        // R T with R the rotation by theta in span{t, n}; n is orthogonal to
        // col T so R T = T + ((cos - 1) t + sin n) (t^t T).
        let mut w = linalg::scale(&t, libm::cos(theta) - 1.0);
        linalg::axpy(&mut w, libm::sin(theta), &n);
        let mut rotated = frame.matrix().clone();
        rotated.add_outer(1.0, &w, &frame.coords(&t));
        frames.push(Frame::new(rotated)?);
    }
    cloud.with_frames(frames, mode)
}

/// Tangent frames from local PCA: the `m` most dominant eigenvectors of the
/// centered second-moment matrix of the samples within `radius`.
pub fn estimate_frames_pca(cloud: &SampleCloud, radius: f64) -> Result<SampleCloud> {
    if !(radius >= 2.0 * cloud.eps()) || !radius.is_finite() {
        return Err(domain(format!("PCA radius must be at least 2 eps, got {radius}")));
    }
    let (d, m) = (cloud.ambient_dim(), cloud.intrinsic_dim());
    let mut frames = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points().enumerate() {
        let nbrs = cloud.within(p, radius, true);
        if nbrs.len() < m + 1 {
            return Err(Error::InsufficientNeighbors { index: i, found: nbrs.len(), needed: m + 1 });
        }
        let mut mean = vec![0.0; d];
        for &j in &nbrs {
            linalg::axpy(&mut mean, 1.0 / nbrs.len() as f64, cloud.point(j));
        }
        let mut cov = Matrix::zeros(d, d);
        for &j in &nbrs {
            let c = linalg::sub(cloud.point(j), &mean);
            cov.add_outer(1.0 / nbrs.len() as f64, &c, &c);
        }
        let spectrum = linalg::sym_eig(&cov)?;
        frames.push(spectrum.most_dominant(m));
    }
    cloud.with_frames(frames, FrameMode::Pca { radius })
}

/// Angle between each frame and the exact tangent space at its sample.
pub fn frame_errors(cloud: &SampleCloud, manifold: &SyntheticManifold) -> Result<Vec<f64>> {
    cloud
        .points()
        .zip(cloud.frames())
        .map(|(p, f)| linalg::subspace_angle(f, &manifold.tangent_frame(p)?))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingReport {
    pub max_count: usize,
    /// `(4t + 1)^m * kappa_measured`
    pub bound: f64,
    pub pass: bool,
}

/// Counts samples in closed balls of radius `t * eps` around `n_centers`
/// random points within `2 eps` of the sample and compares the largest count
/// with `(4t + 1)^m * kappa`.
pub fn verify_packing(cloud: &SampleCloud, t: f64, n_centers: usize) -> Result<PackingReport> {
    let t_max = 1.0 / libm::sqrt(2.0 * cloud.eps());
    if !(t >= 1.0 && t <= t_max) {
        return Err(domain(format!("t must lie in [1, {t_max}], got {t}")));
    }
    let (d, m) = (cloud.ambient_dim(), cloud.intrinsic_dim());
    let bound = libm::pow(4.0 * t + 1.0, m as f64) * cloud.kappa_measured() as f64;
    let mut max_count = 0;
    if !cloud.is_empty() {
        let mut rng = rng::seeded(cloud.seed(), Stream::Packing);
        for _ in 0..n_centers {
            let p = cloud.point(rng::index(&mut rng, cloud.len()));
            let c = linalg::add(p, &rng::in_ball(&mut rng, d, 2.0 * cloud.eps()));
            max_count = max_count.max(cloud.within(&c, t * cloud.eps(), true).len());
        }
    }
    Ok(PackingReport { max_count, bound, pass: max_count as f64 <= bound })
}

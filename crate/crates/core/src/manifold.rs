//! Parametric test manifolds with exact geometry.
//!
//! Every manifold is rescaled at construction so that its reach is 1. The
//! shape parameters passed in are kept as given and the applied factor is
//! available through [`SyntheticManifold::scale`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::error::{domain, Error, Result};
use crate::linalg::{self, Frame, Matrix};
use crate::rng;

/// Points within this distance (times the reach) of the medial axis are
/// rejected by [`SyntheticManifold::nearest_point`].
pub const MEDIAL_GUARD: f64 = 1e-9;

/// Points farther than this from `M` are not accepted as manifold points.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Circle { radius: f64 },
    Sphere { radius: f64 },
    /// Surface of revolution in R^3; `major` is the distance from the axis to
    /// the tube center, `minor` the tube radius.
    Torus { major: f64, minor: f64 },
    /// Product of two circles of equal radius in R^4.
    FlatTorus { radius: f64 },
    /// `u -> (cos k1 u, sin k1 u, cos k2 u, sin k2 u, ...)` for the listed
    /// frequencies `k_j`.
    TrigCurve { frequencies: Vec<u32> },
}

impl Shape {
    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Circle { .. } => "circle",
            Shape::Sphere { .. } => "sphere2",
            Shape::Torus { .. } => "torus3",
            Shape::FlatTorus { .. } => "flat_torus4",
            Shape::TrigCurve { .. } => "trig_curve",
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Shape::Circle { .. } | Shape::TrigCurve { .. } => 1,
            Shape::Sphere { .. } | Shape::Torus { .. } | Shape::FlatTorus { .. } => 2,
        }
    }

    /// Number of coordinates used before padding and rotation.
    fn base_dim(&self) -> usize {
        match self {
            Shape::Circle { .. } => 2,
            Shape::Sphere { .. } | Shape::Torus { .. } => 3,
            Shape::FlatTorus { .. } => 4,
            Shape::TrigCurve { frequencies } => 2 * frequencies.len(),
        }
    }
}

/// One coordinate of the parameter domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticManifold {
    shape: Shape,
    ambient_dim: usize,
    scale: f64,
    rotation_seed: Option<u64>,
    rotation: Option<Matrix>,
}

impl SyntheticManifold {
    /// Builds the manifold in R^`ambient_dim`. A rotation seed applies a fixed
    /// random orthogonal map after embedding; only curves accept one.
    pub fn new(shape: Shape, ambient_dim: usize, rotation_seed: Option<u64>) -> Result<Self> {
        let raw_reach = validate(&shape, ambient_dim)?;
        if rotation_seed.is_some() && !matches!(shape, Shape::Circle { .. } | Shape::TrigCurve { .. }) {
            return Err(domain(format!("{} does not support an ambient rotation", shape.kind())));
        }
        let rotation = rotation_seed.map(|seed| {
            let mut r = rng::seeded(seed, rng::Stream::Rotation);
            rng::orthogonal_matrix(&mut r, ambient_dim)
        });
        Ok(Self {
            shape,
            ambient_dim,
            scale: 1.0 / raw_reach,
            rotation_seed,
            rotation,
        })
    }

    pub fn circle(radius: f64, ambient_dim: usize) -> Result<Self> {
        Self::new(Shape::Circle { radius }, ambient_dim, None)
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::new(Shape::Sphere { radius }, 3, None)
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        Self::new(Shape::Torus { major, minor }, 3, None)
    }

    pub fn flat_torus(radius: f64) -> Result<Self> {
        Self::new(Shape::FlatTorus { radius }, 4, None)
    }

    pub fn trig_curve(frequencies: Vec<u32>, ambient_dim: usize) -> Result<Self> {
        Self::new(Shape::TrigCurve { frequencies }, ambient_dim, None)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind(&self) -> &'static str {
        self.shape.kind()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.shape.intrinsic_dim()
    }

    /// Always 1 after rescaling.
    pub fn reach(&self) -> f64 {
        1.0
    }

    /// Factor applied to the raw shape to make the reach 1.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation_seed(&self) -> Option<u64> {
        self.rotation_seed
    }

    pub fn param_domain(&self) -> Vec<ParamRange> {
        let periodic = ParamRange { lo: 0.0, hi: TAU, periodic: true };
        match self.shape {
            Shape::Sphere { .. } => vec![ParamRange { lo: 0.0, hi: PI, periodic: false }, periodic],
            _ => vec![periodic; self.intrinsic_dim()],
        }
    }

    /// Lower and upper bounds of `|d embed / d u_i|` over the parameter box.
    pub fn speed_bounds(&self, bounds: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let s = self.scale;
        match &self.shape {
            Shape::Circle { radius } => vec![(s * radius, s * radius)],
            Shape::FlatTorus { radius } => vec![(s * radius, s * radius); 2],
            Shape::TrigCurve { frequencies } => {
                let v = s * libm::sqrt(frequencies.iter().map(|&k| (k * k) as f64).sum());
                vec![(v, v)]
            }
            Shape::Torus { major, minor } => vec![
                (s * (major - minor), s * (major + minor)),
                (s * minor, s * minor),
            ],
            Shape::Sphere { radius } => {
                let (a, b) = bounds.first().copied().unwrap_or((0.0, PI));
                let lo = libm::sin(a).min(libm::sin(b)).max(0.0);
                let hi = if a <= PI / 2.0 && PI / 2.0 <= b {
                    1.0
                } else {
                    libm::sin(a).max(libm::sin(b))
                };
                vec![(s * radius, s * radius), (s * radius * lo, s * radius * hi)]
            }
        }
    }

    fn check_arity(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.intrinsic_dim() {
            return Err(domain(format!(
                "{} takes {} parameters, got {}",
                self.kind(),
                self.intrinsic_dim(),
                u.len()
            )));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(domain("non-finite parameter"));
        }
        Ok(())
    }

    /// Point of `M` for the parameter vector `u`.
    pub fn embed(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(u)?;
        Ok(self.lift_base(self.base_point(u)))
    }

    /// Partial derivatives of [`embed`](Self::embed), one vector per parameter.
    pub fn embed_derivatives(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_arity(u)?;
        Ok(self
            .base_derivatives(u)
            .into_iter()
            .map(|v| self.rotate(pad(v, self.ambient_dim)))
            .collect())
    }

    fn base_point(&self, u: &[f64]) -> Vec<f64> {
        let s = self.scale;
        let (c, sn) = (libm::cos, libm::sin);
        match &self.shape {
            Shape::Circle { radius } => {
                let r = s * radius;
                vec![r * c(u[0]), r * sn(u[0])]
            }
            Shape::Sphere { radius } => {
                let r = s * radius;
                let (t, p) = (u[0], u[1]);
                vec![r * sn(t) * c(p), r * sn(t) * sn(p), r * c(t)]
            }
            Shape::Torus { major, minor } => {
                let (big, small) = (s * major, s * minor);
                let ring = big + small * c(u[1]);
                vec![ring * c(u[0]), ring * sn(u[0]), small * sn(u[1])]
            }
            Shape::FlatTorus { radius } => {
                let r = s * radius;
                vec![r * c(u[0]), r * sn(u[0]), r * c(u[1]), r * sn(u[1])]
            }
            Shape::TrigCurve { frequencies } => frequencies
                .iter()
                .flat_map(|&k| {
                    let a = k as f64 * u[0];
                    [s * c(a), s * sn(a)]
                })
                .collect(),
        }
    }

    fn base_derivatives(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let s = self.scale;
        let (c, sn) = (libm::cos, libm::sin);
        match &self.shape {
            Shape::Circle { radius } => {
                let r = s * radius;
                vec![vec![-r * sn(u[0]), r * c(u[0])]]
            }
            Shape::Sphere { radius } => {
                let r = s * radius;
                let (t, p) = (u[0], u[1]);
                vec![
                    vec![r * c(t) * c(p), r * c(t) * sn(p), -r * sn(t)],
                    vec![-r * sn(t) * sn(p), r * sn(t) * c(p), 0.0],
                ]
            }
            Shape::Torus { major, minor } => {
                let (big, small) = (s * major, s * minor);
                let ring = big + small * c(u[1]);
                vec![
                    vec![-ring * sn(u[0]), ring * c(u[0]), 0.0],
                    vec![-small * sn(u[1]) * c(u[0]), -small * sn(u[1]) * sn(u[0]), small * c(u[1])],
                ]
            }
            Shape::FlatTorus { radius } => {
                let r = s * radius;
                vec![
                    vec![-r * sn(u[0]), r * c(u[0]), 0.0, 0.0],
                    vec![0.0, 0.0, -r * sn(u[1]), r * c(u[1])],
                ]
            }
            Shape::TrigCurve { frequencies } => vec![frequencies
                .iter()
                .flat_map(|&k| {
                    let kf = k as f64;
                    let a = kf * u[0];
                    [-s * kf * sn(a), s * kf * c(a)]
                })
                .collect()],
        }
    }

    fn rotate(&self, v: Vec<f64>) -> Vec<f64> {
        match &self.rotation {
            Some(q) => q.mul_vec(&v),
            None => v,
        }
    }

    fn lift_base(&self, base: Vec<f64>) -> Vec<f64> {
        self.rotate(pad(base, self.ambient_dim))
    }

    fn to_base(&self, x: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(q) => q.tr_mul_vec(x),
            None => x.to_vec(),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(domain("non-finite point"));
        }
        Ok(())
    }

    /// Parameters of the nearest point of `M` to `x`.
    pub fn locate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let y = self.to_base(x);
        let guard = MEDIAL_GUARD * self.reach();
        let wrap = |a: f64| if a < 0.0 { a + TAU } else { a };
        match &self.shape {
            Shape::Circle { .. } => {
                if libm::hypot(y[0], y[1]) < guard {
                    return Err(Error::MedialAxis);
                }
                Ok(vec![wrap(libm::atan2(y[1], y[0]))])
            }
            Shape::Sphere { .. } => {
                let r = linalg::norm(&y);
                if r < guard {
                    return Err(Error::MedialAxis);
                }
                let polar = libm::acos((y[2] / r).clamp(-1.0, 1.0));
                Ok(vec![polar, wrap(libm::atan2(y[1], y[0]))])
            }
            Shape::Torus { major, .. } => {
                let rho = libm::hypot(y[0], y[1]);
                if rho < guard {
                    return Err(Error::MedialAxis);
                }
                let w = rho - self.scale * major;
                if libm::hypot(w, y[2]) < guard {
                    return Err(Error::MedialAxis);
                }
                Ok(vec![wrap(libm::atan2(y[1], y[0])), wrap(libm::atan2(y[2], w))])
            }
            Shape::FlatTorus { .. } => {
                if libm::hypot(y[0], y[1]) < guard || libm::hypot(y[2], y[3]) < guard {
                    return Err(Error::MedialAxis);
                }
                Ok(vec![wrap(libm::atan2(y[1], y[0])), wrap(libm::atan2(y[3], y[2]))])
            }
            Shape::TrigCurve { frequencies } => {
                trig_locate(frequencies, self.scale, &y[..2 * frequencies.len()], guard).map(|u| vec![u])
            }
        }
    }

    /// The nearest point map `nu(x)`.
    pub fn nearest_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.locate(x)?;
        self.embed(&u)
    }

    /// `|x - nu(x)|`
    pub fn distance_to(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::distance(x, &self.nearest_point(x)?))
    }

    fn locate_on_manifold(&self, z: &[f64]) -> Result<Vec<f64>> {
        let u = self.locate(z).map_err(|e| match e {
            Error::MedialAxis => domain("point is not on the manifold"),
            other => other,
        })?;
        let off = linalg::distance(z, &self.embed(&u)?);
        if off > ON_MANIFOLD_TOL {
            return Err(domain(format!("point is {off:e} away from the manifold")));
        }
        Ok(u)
    }

    /// Orthonormal basis of `T_z`; `z` must lie on `M`.
    pub fn tangent_frame(&self, z: &[f64]) -> Result<Frame> {
        let u = self.locate_on_manifold(z)?;
        if let Shape::Sphere { .. } = self.shape {
            let normal = linalg::orthonormalize(&[self.to_base(z)])?;
            return Ok(normal.complement().expect("sphere normal is a line in R^3"));
        }
        linalg::orthonormalize(&self.embed_derivatives(&u)?)
    }

    /// Orthonormal basis of `N_z`; `z` must lie on `M`.
    pub fn normal_frame(&self, z: &[f64]) -> Result<Frame> {
        Ok(self
            .tangent_frame(z)?
            .complement()
            .expect("intrinsic dimension is below the ambient dimension"))
    }

    pub fn describe(&self) -> String {
        format!("{} in R^{} (scale {})", self.kind(), self.ambient_dim, self.scale)
    }
}

fn pad(mut v: Vec<f64>, d: usize) -> Vec<f64> {
    v.resize(d, 0.0);
    v
}

/// Checks the shape against the ambient dimension and returns its reach
/// before rescaling.
fn validate(shape: &Shape, d: usize) -> Result<f64> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(domain(format!("{name} must be positive, got {v}")))
        }
    };
    let need_dim = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(domain(format!("{} needs {what}, got d = {d}", shape.kind())))
        }
    };
    match shape {
        Shape::Circle { radius } => {
            positive("radius", *radius)?;
            need_dim(d >= 2, "d >= 2")?;
            Ok(*radius)
        }
        Shape::Sphere { radius } => {
            positive("radius", *radius)?;
            need_dim(d == 3, "d = 3")?;
            Ok(*radius)
        }
        Shape::Torus { major, minor } => {
            positive("minor radius", *minor)?;
            positive("major radius", *major)?;
            if major <= minor {
                return Err(domain("torus needs major radius > minor radius"));
            }
            need_dim(d == 3, "d = 3")?;
            Ok(minor.min(major - minor))
        }
        Shape::FlatTorus { radius } => {
            positive("radius", *radius)?;
            need_dim(d == 4, "d = 4")?;
            Ok(*radius)
        }
        Shape::TrigCurve { frequencies } => {
            if frequencies.len() < 2 {
                return Err(domain("trig_curve needs at least two frequencies"));
            }
            if frequencies.contains(&0) {
                return Err(domain("trig_curve frequencies must be positive"));
            }
            let mut sorted = frequencies.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != frequencies.len() {
                return Err(domain("trig_curve frequencies must be distinct"));
            }
            if frequencies.iter().fold(0, |g, &k| gcd(g, k)) != 1 {
                return Err(domain("trig_curve frequencies must have gcd 1"));
            }
            need_dim(d >= shape.base_dim(), "d >= 2 * number of frequencies")?;
            Ok(trig_reach(frequencies))
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn wrap_angle(u: f64) -> f64 {
    let r = libm::fmod(u, TAU);
    if r < 0.0 { r + TAU } else { r }
}

/// Reach of the unit-amplitude trig curve: the smaller of the (constant)
/// radius of curvature and half the shortest chord that is normal to the
/// curve at both ends. The curve is an orbit of a one-parameter rotation
/// group, so a chord's squared length depends only on the parameter gap
/// `t`: `g(t) = sum_j 2 (1 - cos k_j t)`, and double normals are the
/// critical points of `g`.
fn trig_reach(frequencies: &[u32]) -> f64 {
    let k2: f64 = frequencies.iter().map(|&k| (k * k) as f64).sum();
    let k4: f64 = frequencies.iter().map(|&k| libm::pow(k as f64, 4.0)).sum();
    let curvature_radius = k2 / libm::sqrt(k4);

    let g = |t: f64| -> f64 {
        frequencies
            .iter()
            .map(|&k| 2.0 * (1.0 - libm::cos(k as f64 * t)))
            .sum()
    };
    let dg = |t: f64| -> f64 {
        frequencies
            .iter()
            .map(|&k| 2.0 * k as f64 * libm::sin(k as f64 * t))
            .sum()
    };
    let kmax = *frequencies.iter().max().expect("validated non-empty") as usize;
    let n = 4096 * kmax;
    let step = TAU / n as f64;
    let mut shortest = f64::INFINITY;
    let mut prev_t = step;
    let mut prev = dg(prev_t);
    for i in 2..n {
        let t = i as f64 * step;
        let cur = dg(t);
        if prev == 0.0 || prev.signum() != cur.signum() {
            let (mut a, mut b) = (prev_t, t);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if dg(a).signum() == dg(mid).signum() {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            shortest = shortest.min(libm::sqrt(g(0.5 * (a + b))));
        }
        prev_t = t;
        prev = cur;
    }
    curvature_radius.min(0.5 * shortest)
}

/// Nearest parameter on the trig curve of amplitude `amp` to base point `y`.
fn trig_locate(frequencies: &[u32], amp: f64, y: &[f64], guard: f64) -> Result<f64> {
    let point = |u: f64| -> Vec<f64> {
        frequencies
            .iter()
            .flat_map(|&k| [amp * libm::cos(k as f64 * u), amp * libm::sin(k as f64 * u)])
            .collect()
    };
    // f(u) = |c(u) - y|^2 and its first two derivatives.
    let f = |u: f64| linalg::distance_squared(&point(u), y);
    let derivs = |u: f64| -> (f64, f64) {
        let (mut d1, mut d2) = (0.0, 0.0);
        for (j, &k) in frequencies.iter().enumerate() {
            let kf = k as f64;
            let (c, s) = (libm::cos(kf * u), libm::sin(kf * u));
            let (dx, dy) = (amp * c - y[2 * j], amp * s - y[2 * j + 1]);
            let (tx, ty) = (-amp * kf * s, amp * kf * c);
            let (ax, ay) = (-amp * kf * kf * c, -amp * kf * kf * s);
            d1 += 2.0 * (tx * dx + ty * dy);
            d2 += 2.0 * (ax * dx + ay * dy + tx * tx + ty * ty);
        }
        (d1, d2)
    };

    let kmax = *frequencies.iter().max().expect("validated non-empty") as usize;
    let n = 256 * kmax;
    let step = TAU / n as f64;
    let values: Vec<f64> = (0..n).map(|i| f(i as f64 * step)).collect();
    let mut minima: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let (before, after) = (values[(i + n - 1) % n], values[(i + 1) % n]);
        if values[i] <= before && values[i] <= after {
            // golden-section search on the bracketing cells, then Newton polish
            let (mut a, mut b) = ((i as f64 - 1.0) * step, (i as f64 + 1.0) * step);
            let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
            let mut c = b - ratio * (b - a);
            let mut d = a + ratio * (b - a);
            let (mut fc, mut fd) = (f(c), f(d));
            while b - a > 1e-9 * step {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - ratio * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + ratio * (b - a);
                    fd = f(d);
                }
            }
            let mut u = 0.5 * (a + b);
            for _ in 0..4 {
                let (d1, d2) = derivs(u);
                if d2 <= 0.0 {
                    break;
                }
                let next = u - d1 / d2;
                if (next - u).abs() > step {
                    break;
                }
                u = next;
            }
            minima.push((libm::sqrt(f(u).max(0.0)), wrap_angle(u)));
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (best_dist, best_u) = minima[0];
    for &(dist, u) in &minima[1..] {
        if dist - best_dist >= guard {
            break;
        }
        let gap = wrap_angle(u - best_u);
        if gap.min(TAU - gap) > 1e-6 {
            return Err(Error::MedialAxis);
        }
    }
    Ok(best_u)
}

//! Serializable forms of the core types.

use serde::{Deserialize, Serialize};
use zeroset_core::field::{EvalResult, Support};
use zeroset_core::manifold::Shape;
use zeroset_core::metrics::FidelityReport;
use zeroset_core::sampling::CloudMeta;
use zeroset_core::{Frame, FrameMode, Matrix, ProjectionTrace, Region, SampleCloud, SyntheticManifold};

use crate::FormatError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameModeRecord {
    Exact,
    Perturbed { max_angle: f64 },
    Pca { radius: f64 },
}

impl From<FrameMode> for FrameModeRecord {
    fn from(mode: FrameMode) -> Self {
        match mode {
            FrameMode::Exact => FrameModeRecord::Exact,
            FrameMode::Perturbed { max_angle } => FrameModeRecord::Perturbed { max_angle },
            FrameMode::Pca { radius } => FrameModeRecord::Pca { radius },
        }
    }
}

impl From<FrameModeRecord> for FrameMode {
    fn from(mode: FrameModeRecord) -> Self {
        match mode {
            FrameModeRecord::Exact => FrameMode::Exact,
            FrameModeRecord::Perturbed { max_angle } => FrameMode::Perturbed { max_angle },
            FrameModeRecord::Pca { radius } => FrameMode::Pca { radius },
        }
    }
}

/// A sample cloud on disk. Frames are `d x m` matrices flattened row-major.
/// `region` is present only for clouds that cover a parameter patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudRecord {
    pub d: usize,
    pub m: usize,
    pub eps: f64,
    pub gamma: f64,
    pub kappa_measured: usize,
    pub frame_mode: FrameModeRecord,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<[f64; 2]>>,
    pub points: Vec<Vec<f64>>,
    pub frames: Vec<Vec<f64>>,
}

impl CloudRecord {
    pub fn from_cloud(cloud: &SampleCloud) -> Self {
        Self {
            d: cloud.ambient_dim(),
            m: cloud.intrinsic_dim(),
            eps: cloud.eps(),
            gamma: cloud.gamma(),
            kappa_measured: cloud.kappa_measured(),
            frame_mode: cloud.frame_mode().into(),
            seed: cloud.seed(),
            region: cloud.region().map(|r| r.bounds().iter().map(|&(lo, hi)| [lo, hi]).collect()),
            points: cloud.points().map(<[f64]>::to_vec).collect(),
            frames: cloud.frames().iter().map(|f| f.matrix().as_slice().to_vec()).collect(),
        }
    }

    pub fn into_cloud(self) -> Result<SampleCloud, FormatError> {
        if self.gamma != 4.0 * self.eps {
            return Err(FormatError::Invalid(format!(
                "gamma must equal 4 * eps, got gamma = {} and eps = {}",
                self.gamma, self.eps
            )));
        }
        let frames = self
            .frames
            .into_iter()
            .enumerate()
            .map(|(i, flat)| {
                let matrix = Matrix::from_row_major(self.d, self.m, flat)
                    .map_err(|e| FormatError::Invalid(format!("frame {i}: {e}")))?;
                Frame::new(matrix).map_err(|e| FormatError::Invalid(format!("frame {i}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let region = self
            .region
            .map(|b| Region::new(b.into_iter().map(|[lo, hi]| (lo, hi)).collect()))
            .transpose()?;
        let meta = CloudMeta {
            kappa_measured: self.kappa_measured,
            frame_mode: self.frame_mode.into(),
            seed: self.seed,
            region,
        };
        Ok(SampleCloud::new(self.d, self.m, self.eps, self.points, frames, meta)?)
    }
}

/// Shape parameters before rescaling to unit reach. Which fields apply
/// depends on the kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub major: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<u32>>,
}

/// `{kind, d, params, seed}`; `seed` is the ambient rotation seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDescriptor {
    pub kind: String,
    pub d: usize,
    pub params: ShapeParams,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ManifoldDescriptor {
    pub fn from_manifold(manifold: &SyntheticManifold) -> Self {
        let params = match manifold.shape() {
            Shape::Circle { radius } | Shape::Sphere { radius } | Shape::FlatTorus { radius } => {
                ShapeParams { radius: Some(*radius), ..Default::default() }
            }
            Shape::Torus { major, minor } => ShapeParams { major: Some(*major), minor: Some(*minor), ..Default::default() },
            Shape::TrigCurve { frequencies } => ShapeParams { frequencies: Some(frequencies.clone()), ..Default::default() },
        };
        Self {
            kind: manifold.kind().to_string(),
            d: manifold.ambient_dim(),
            params,
            seed: manifold.rotation_seed(),
        }
    }

    pub fn to_manifold(&self) -> Result<SyntheticManifold, FormatError> {
        let p = &self.params;
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| FormatError::Invalid(format!("{} needs parameter `{name}`", self.kind)))
        };
        let allowed: &[&str] = match self.kind.as_str() {
            "circle" | "sphere2" | "flat_torus4" => &["radius"],
            "torus3" => &["major", "minor"],
            "trig_curve" => &["frequencies"],
            other => return Err(FormatError::Invalid(format!("unknown manifold kind `{other}`"))),
        };
        let present = [
            ("radius", p.radius.is_some()),
            ("major", p.major.is_some()),
            ("minor", p.minor.is_some()),
            ("frequencies", p.frequencies.is_some()),
        ];
        if let Some((name, _)) = present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
            return Err(FormatError::Invalid(format!("{} does not take parameter `{name}`", self.kind)));
        }
        let shape = match self.kind.as_str() {
            "circle" => Shape::Circle { radius: need("radius", p.radius)? },
            "sphere2" => Shape::Sphere { radius: need("radius", p.radius)? },
            "flat_torus4" => Shape::FlatTorus { radius: need("radius", p.radius)? },
            "torus3" => Shape::Torus { major: need("major", p.major)?, minor: need("minor", p.minor)? },
            _ => Shape::TrigCurve {
                frequencies: p
                    .frequencies
                    .clone()
                    .ok_or_else(|| FormatError::Invalid("trig_curve needs parameter `frequencies`".into()))?,
            },
        };
        Ok(SyntheticManifold::new(shape, self.d, self.seed)?)
    }
}

/// `{status, iterates, residuals}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub status: String,
    pub iterates: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

impl From<&ProjectionTrace> for TraceRecord {
    fn from(t: &ProjectionTrace) -> Self {
        Self { status: t.status.as_str().to_string(), iterates: t.iterates.clone(), residuals: t.residuals.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub status: String,
    pub phi: Vec<f64>,
    pub phi_norm: f64,
    pub spectral_gap: Option<f64>,
    pub degenerate: Option<bool>,
    pub eigenvalues: Option<Vec<f64>>,
    pub centroid: Option<Vec<f64>>,
    pub n_neighbors: usize,
}

impl From<&EvalResult> for EvalRecord {
    fn from(r: &EvalResult) -> Self {
        let local = r.local.as_ref();
        Self {
            status: match r.status {
                Support::InSupport => "InSupport",
                Support::OutOfSupport => "OutOfSupport",
            }
            .to_string(),
            phi: r.phi.clone(),
            phi_norm: r.residual(),
            spectral_gap: r.spectral_gap(),
            degenerate: local.map(|l| l.split.degenerate),
            eigenvalues: local.map(|l| l.split.eigenvalues.clone()),
            centroid: local.map(|l| l.centroid.clone()),
            n_neighbors: local.map_or(0, |l| l.weights.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub eps: f64,
    pub max_normal_angle: f64,
    pub mean_normal_angle: f64,
    #[serde(rename = "hausdorff_M_to_Z")]
    pub hausdorff_m_to_z: f64,
    #[serde(rename = "hausdorff_Z_to_M")]
    pub hausdorff_z_to_m: f64,
    pub zero_offset_max: f64,
    pub contraction_median: Option<f64>,
    pub n_test_points: usize,
    pub n_seeds: usize,
    pub excluded_points: usize,
    pub non_converged: usize,
    pub max_iterations: usize,
    pub reliability_warning: bool,
    pub cloud_size: usize,
    pub manifold: ManifoldDescriptor,
}

impl ReportRecord {
    pub fn new(report: &FidelityReport, cloud: &SampleCloud, manifold: &SyntheticManifold) -> Self {
        Self {
            eps: report.eps,
            max_normal_angle: report.max_normal_angle,
            mean_normal_angle: report.mean_normal_angle,
            hausdorff_m_to_z: report.hausdorff_m_to_z,
            hausdorff_z_to_m: report.hausdorff_z_to_m,
            zero_offset_max: report.zero_offset_max,
            contraction_median: report.contraction_median,
            n_test_points: report.n_test_points,
            n_seeds: report.n_seeds,
            excluded_points: report.excluded_points,
            non_converged: report.non_converged,
            max_iterations: report.max_iterations,
            reliability_warning: report.reliability_warning,
            cloud_size: cloud.len(),
            manifold: ManifoldDescriptor::from_manifold(manifold),
        }
    }

    /// Plain-text summary, one quantity per line.
    pub fn table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6e}"));
        let rows: Vec<(&str, String)> = vec![
            ("manifold", format!("{} in R^{}", self.manifold.kind, self.manifold.d)),
            ("samples", self.cloud_size.to_string()),
            ("eps", format!("{:.6e}", self.eps)),
            ("max normal angle", format!("{:.6e}", self.max_normal_angle)),
            ("mean normal angle", format!("{:.6e}", self.mean_normal_angle)),
            ("hausdorff M->Z", format!("{:.6e}", self.hausdorff_m_to_z)),
            ("hausdorff Z->M", format!("{:.6e}", self.hausdorff_z_to_m)),
            ("zero offset max", format!("{:.6e}", self.zero_offset_max)),
            ("median contraction", opt(self.contraction_median)),
            ("max iterations", self.max_iterations.to_string()),
            ("test points", format!("{} ({} excluded)", self.n_test_points, self.excluded_points)),
            ("seeds", format!("{} ({} not converged)", self.n_seeds, self.non_converged)),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
    }
}

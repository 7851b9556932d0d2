//! Command-line arguments. The parsed form is also serializable, so a run can
//! be saved with `--save-config` and repeated with `zeroset replay`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::formats::{ManifoldDescriptor, ShapeParams};
use crate::FormatError;

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a positive number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a non-negative number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "zeroset", version, about = "Reconstruct sampled manifolds as the zero set of a normal-space field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: RunConfig,
    /// Worker threads for batch work (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write the parsed command as JSON to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub save_config: Option<PathBuf>,
}

/// One command with all of its parameters.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    /// Generate an eps-dense sample with exact tangent frames.
    Sample(SampleArgs),
    /// Replace the tangent frames of a cloud.
    Frames(FramesArgs),
    /// Evaluate the field at one point.
    Eval(EvalArgs),
    /// Project seed points onto the zero set.
    Project(ProjectArgs),
    /// Measure how faithfully the zero set reproduces the manifold.
    Evaluate(EvaluateArgs),
    /// Run a command saved with --save-config.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Circle,
    Sphere2,
    Torus3,
    FlatTorus4,
    TrigCurve,
}

/// A manifold given either by flags or by a descriptor file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
pub struct ManifoldArgs {
    #[arg(long, value_enum, conflicts_with = "descriptor")]
    pub manifold: Option<ManifoldKind>,
    /// Ambient dimension (circle and trig_curve only).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_parser = positive)]
    pub radius: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub major: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub minor: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub frequencies: Option<Vec<u32>>,
    /// Seed of a random ambient rotation (circle and trig_curve only).
    #[arg(long)]
    pub rotation_seed: Option<u64>,
    /// JSON manifold descriptor {kind, d, params, seed}.
    #[arg(long, value_name = "PATH")]
    pub descriptor: Option<PathBuf>,
}

impl ManifoldArgs {
    /// `None` when neither flags nor a descriptor were given.
    pub fn descriptor(&self) -> Result<Option<ManifoldDescriptor>, FormatError> {
        if let Some(path) = &self.descriptor {
            return crate::json::read_file(path).map(Some);
        }
        let Some(kind) = self.manifold else {
            return Ok(None);
        };
        let (name, fixed_d, params) = match kind {
            ManifoldKind::Circle => (
                "circle",
                None,
                ShapeParams { radius: Some(self.radius.unwrap_or(1.0)), ..Default::default() },
            ),
            ManifoldKind::Sphere2 => (
                "sphere2",
                Some(3),
                ShapeParams { radius: Some(self.radius.unwrap_or(1.0)), ..Default::default() },
            ),
            ManifoldKind::FlatTorus4 => (
                "flat_torus4",
                Some(4),
                ShapeParams { radius: Some(self.radius.unwrap_or(1.0)), ..Default::default() },
            ),
            ManifoldKind::Torus3 => (
                "torus3",
                Some(3),
                ShapeParams {
                    major: Some(self.major.unwrap_or(3.0)),
                    minor: Some(self.minor.unwrap_or(1.0)),
                    ..Default::default()
                },
            ),
            ManifoldKind::TrigCurve => (
                "trig_curve",
                None,
                ShapeParams { frequencies: Some(self.frequencies.clone().unwrap_or_else(|| vec![1, 2])), ..Default::default() },
            ),
        };
        let default_d = match kind {
            ManifoldKind::Circle => 2,
            ManifoldKind::TrigCurve => 2 * params.frequencies.as_ref().map_or(2, Vec::len),
            _ => fixed_d.unwrap_or(3),
        };
        let d = match (fixed_d, self.d) {
            (Some(fixed), Some(given)) if fixed != given => {
                return Err(FormatError::Invalid(format!("{name} lives in R^{fixed}, got --d {given}")));
            }
            (_, given) => given.unwrap_or(default_d),
        };
        Ok(Some(ManifoldDescriptor { kind: name.to_string(), d, params, seed: self.rotation_seed }))
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    /// Sampling density; gamma = 4 eps.
    #[arg(long, value_parser = positive)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parameter patch as `lo:hi` per intrinsic dimension, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the manifold descriptor here.
    #[arg(long, value_name = "PATH")]
    pub descriptor_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameModeArg {
    Exact,
    Perturbed,
    Pca,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FramesArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    #[arg(long, value_enum)]
    pub mode: FrameModeArg,
    /// Perturbation budget in radians (defaults to m * gamma).
    #[arg(long, value_parser = non_negative)]
    pub max_angle: Option<f64>,
    /// PCA neighborhood radius (defaults to m * gamma).
    #[arg(long, value_parser = positive)]
    pub pca_radius: Option<f64>,
    /// Seed for the perturbation (defaults to the cloud's seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ground truth; required for exact frames, used for error reporting
    /// otherwise.
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize, Deserialize)]
pub struct ProjectionArgs {
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-12, value_parser = positive)]
    pub step_tol: f64,
    #[arg(long, default_value_t = 1e-11, value_parser = positive)]
    pub residual_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ProjectArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    /// CSV with one seed point of d values per row.
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the full iteration traces as JSON.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Exit 0 even when some seeds do not converge.
    #[arg(long)]
    pub allow_partial: bool,
    #[command(flatten)]
    pub projection: ProjectionArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long, default_value_t = 200)]
    pub n_points: usize,
    #[arg(long, default_value_t = 100)]
    pub n_seeds: usize,
    /// Normal offset of the angle test points (defaults to eps).
    #[arg(long, value_parser = non_negative)]
    pub offset: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub projection: ProjectionArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub config: PathBuf,
}

/// Parses `lo:hi,lo:hi,...`.
pub fn parse_region(text: &str) -> Result<Vec<(f64, f64)>, FormatError> {
    text.split(',')
        .map(|part| {
            let bad = || FormatError::Invalid(format!("region range `{part}` is not of the form lo:hi"));
            let (lo, hi) = part.split_once(':').ok_or_else(bad)?;
            Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Parses comma-separated reals.
pub fn parse_point(text: &str) -> Result<Vec<f64>, FormatError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| FormatError::Invalid(format!("`{}` is not a finite number", s.trim())))
        })
        .collect()
}

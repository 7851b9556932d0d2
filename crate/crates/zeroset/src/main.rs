use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{CommandFactory, Parser};
use rayon::prelude::*;

use zeroset::config::{
    self, Cli, EvalArgs, EvaluateArgs, FrameModeArg, FramesArgs, ManifoldArgs, ProjectArgs, ProjectionArgs, RunConfig,
    SampleArgs,
};
use zeroset::formats::{CloudRecord, EvalRecord, ManifoldDescriptor, ReportRecord, TraceRecord};
use zeroset::points::{self, ProjectionRow};
use zeroset::{json, FormatError};
use zeroset_core::metrics::{self, FidelityConfig};
use zeroset_core::sampling::{self, SampleOptions, SampleWarning};
use zeroset_core::{FrameMode, ProjectionOptions, ProjectionStatus, Region, SampleCloud, SyntheticManifold};

/// A run that completed but did not reach a numeric target; exit code 2.
#[derive(Debug)]
struct NumericFailure(String);

impl fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericFailure {}

fn core_exit_code(e: &zeroset_core::Error) -> u8 {
    use zeroset_core::Error::*;
    match e {
        Domain(_) | DimensionMismatch { .. } | OutOfSupport | MedialAxis | InsufficientNeighbors { .. } => 1,
        Numeric(_) | RankDeficient | InsufficientData(_) | LeftSupport => 2,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<NumericFailure>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<zeroset_core::Error>() {
            return core_exit_code(e);
        }
        if let Some(FormatError::Core(e)) = cause.downcast_ref::<FormatError>() {
            return core_exit_code(e);
        }
    }
    1
}

fn load_cloud(path: &Path) -> Result<SampleCloud> {
    let record: CloudRecord = json::read_file(path)?;
    record.into_cloud().with_context(|| format!("invalid cloud in {}", path.display()))
}

fn save_cloud(path: &Path, cloud: &SampleCloud) -> Result<()> {
    Ok(json::write_file(path, &CloudRecord::from_cloud(cloud))?)
}

fn manifold_from(args: &ManifoldArgs) -> Result<Option<(ManifoldDescriptor, SyntheticManifold)>> {
    match args.descriptor()? {
        Some(desc) => {
            let m = desc.to_manifold()?;
            Ok(Some((desc, m)))
        }
        None => Ok(None),
    }
}

fn require_manifold(args: &ManifoldArgs) -> Result<(ManifoldDescriptor, SyntheticManifold)> {
    manifold_from(args)?.ok_or_else(|| anyhow!("a manifold is required: pass --manifold <KIND> or --descriptor <PATH>"))
}

fn projection_options(p: &ProjectionArgs) -> ProjectionOptions {
    ProjectionOptions { max_iters: p.max_iters, step_tol: p.step_tol, residual_tol: p.residual_tol }
}

fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let (desc, manifold) = require_manifold(&args.manifold)?;
    let region = args
        .region
        .as_deref()
        .map(|text| Region::new(config::parse_region(text)?).map_err(FormatError::from))
        .transpose()?;
    let opts = SampleOptions { seed: args.seed, region, ..Default::default() };
    let generated = sampling::generate_sample(&manifold, args.eps, &opts)?;
    save_cloud(&args.out, &generated.cloud)?;
    if let Some(path) = &args.descriptor_out {
        json::write_file(path, &desc)?;
    }
    for w in &generated.warnings {
        match w {
            SampleWarning::DegenerateSample => eprintln!("warning: degenerate sample, eps is too large for this manifold"),
        }
    }
    println!("|P| = {}", generated.cloud.len());
    println!("kappa_measured = {}", generated.cloud.kappa_measured());
    Ok(())
}

fn cmd_frames(args: &FramesArgs) -> Result<()> {
    let mut cloud = load_cloud(&args.cloud)?;
    let truth = manifold_from(&args.manifold)?;
    let mg = cloud.support_radius();
    let updated = match args.mode {
        FrameModeArg::Exact => {
            let (_, manifold) = truth.as_ref().ok_or_else(|| anyhow!("exact frames need --manifold or --descriptor"))?;
            let frames = cloud
                .points()
                .enumerate()
                .map(|(i, p)| manifold.tangent_frame(p).with_context(|| format!("sample {i} is not on the manifold")))
                .collect::<Result<Vec<_>>>()?;
            cloud.with_frames(frames, FrameMode::Exact)?
        }
        FrameModeArg::Perturbed => {
            if let Some(seed) = args.seed {
                cloud = cloud.with_seed(seed);
            }
            sampling::perturb_frames(&cloud, args.max_angle.unwrap_or(mg))?
        }
        FrameModeArg::Pca => sampling::estimate_frames_pca(&cloud, args.pca_radius.unwrap_or(mg))?,
    };
    save_cloud(&args.out, &updated)?;
    if let Some((_, manifold)) = &truth {
        let errors = sampling::frame_errors(&updated, manifold)?;
        println!("max frame error = {:.6e}", errors.iter().copied().fold(0.0, f64::max));
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let cloud = load_cloud(&args.cloud)?;
    let x = config::parse_point(&args.point).context("malformed --point")?;
    if x.len() != cloud.ambient_dim() {
        bail!("--point has {} coordinates, the cloud lives in R^{}", x.len(), cloud.ambient_dim());
    }
    let result = zeroset_core::evaluate(&x, &cloud)?;
    print!("{}", json::to_string(&EvalRecord::from(&result))?);
    Ok(())
}

fn project_one(x0: &[f64], cloud: &SampleCloud, opts: &ProjectionOptions) -> Result<(ProjectionRow, TraceRecord)> {
    match zeroset_core::project(x0, cloud, opts) {
        Ok(trace) => Ok((
            ProjectionRow {
                limit: trace.limit().to_vec(),
                residual: trace.final_residual(),
                iterations: trace.iterations(),
                status: trace.status,
            },
            TraceRecord::from(&trace),
        )),
        // the seed has no sample within the support radius
        Err(zeroset_core::Error::Domain(_)) if cloud.neighbors(x0).is_empty() => {
            let status = ProjectionStatus::LeftSupport;
            Ok((
                ProjectionRow { limit: x0.to_vec(), residual: 0.0, iterations: 0, status },
                TraceRecord { status: status.as_str().to_string(), iterates: vec![x0.to_vec()], residuals: vec![0.0] },
            ))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_project(args: &ProjectArgs) -> Result<()> {
    let cloud = load_cloud(&args.cloud)?;
    let seeds = points::read_points(&args.seeds, cloud.ambient_dim())?;
    let opts = projection_options(&args.projection);
    let results: Vec<(ProjectionRow, TraceRecord)> =
        seeds.par_iter().map(|x0| project_one(x0, &cloud, &opts)).collect::<Result<_>>()?;
    let (rows, traces): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    points::write_projections(&args.out, cloud.ambient_dim(), &rows)?;
    if let Some(path) = &args.trace {
        json::write_file(path, &traces)?;
    }
    let failed = rows.iter().filter(|r| r.status != ProjectionStatus::Converged).count();
    println!("projected {} seeds, {} converged", rows.len(), rows.len() - failed);
    if failed > 0 && !args.allow_partial {
        return Err(NumericFailure(format!("{failed} of {} seeds did not converge", rows.len())).into());
    }
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    if args.n_seeds == 0 || args.n_points == 0 {
        bail!("--n-seeds and --n-points must be positive");
    }
    let cloud = load_cloud(&args.cloud)?;
    let (_, manifold) = require_manifold(&args.manifold)?;
    let config = FidelityConfig {
        n_points: args.n_points,
        n_seeds: args.n_seeds,
        offset: args.offset,
        seed: args.seed,
        projection: projection_options(&args.projection),
    };
    let report = metrics::fidelity_report(&cloud, &manifold, &config)?;
    let record = ReportRecord::new(&report, &cloud, &manifold);
    if let Some(path) = &args.out {
        json::write_file(path, &record)?;
    }
    print!("{}", record.table());
    if record.reliability_warning {
        eprintln!("warning: more than 1% of the seeds did not converge; Hausdorff estimates are unreliable");
    }
    Ok(())
}

fn run(command: &RunConfig) -> Result<()> {
    match command {
        RunConfig::Sample(a) => cmd_sample(a),
        RunConfig::Frames(a) => cmd_frames(a),
        RunConfig::Eval(a) => cmd_eval(a),
        RunConfig::Project(a) => cmd_project(a),
        RunConfig::Evaluate(a) => cmd_evaluate(a),
        RunConfig::Replay(a) => {
            let saved: RunConfig = json::read_file(&a.config)?;
            if matches!(saved, RunConfig::Replay(_)) {
                bail!("a saved config cannot itself be a replay");
            }
            run(&saved)
        }
    }
}

/// Usage line of the subcommand named on the command line, if any.
fn usage_for_args() -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let named = std::env::args().skip(1).find_map(|a| cmd.find_subcommand(&a).map(|c| c.get_name().to_string()));
    match named.and_then(|n| cmd.find_subcommand_mut(&n).map(|c| c.render_usage())) {
        Some(usage) => usage.to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", usage_for_args());
            }
            return ExitCode::from(1);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = cli
        .save_config
        .as_ref()
        .map_or(Ok(()), |path| json::write_file(path, &cli.command).map_err(anyhow::Error::from))
        .and_then(|()| run(&cli.command));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

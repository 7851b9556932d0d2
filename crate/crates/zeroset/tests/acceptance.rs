//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use zeroset_core::field::{self, EvalResult};
use zeroset_core::linalg::{self, Frame, Matrix};
use zeroset_core::metrics;
use zeroset_core::projector::{self, ProjectionOptions, ProjectionTrace};
use zeroset_core::rng::{self, SeededRng, Stream};
use zeroset_core::sampling::{self, SampleOptions};
use zeroset_core::{weights, Region, SampleCloud, SyntheticManifold};
use zeroset_oracles as oracles;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng_for(criterion: u64) -> SeededRng {
    rng::seeded(1000 + criterion, Stream::Metrics)
}

fn circle(d: usize) -> SyntheticManifold {
    SyntheticManifold::circle(1.0, d).unwrap()
}

fn torus() -> SyntheticManifold {
    SyntheticManifold::torus(3.0, 1.0).unwrap()
}

fn sample(manifold: &SyntheticManifold, eps: f64, region: Option<Region>) -> SampleCloud {
    let opts = SampleOptions { seed: 1, region, ..Default::default() };
    sampling::generate_sample(manifold, eps, &opts).unwrap().cloud
}

/// Torus patch around the inner equator: a fixed core box padded by the
/// margin that metrics strip off, so the sampled area scales with eps.
fn torus_patch(eps: f64) -> Region {
    let mg = 2.0 * 4.0 * eps;
    let margin = 2.0 * mg + 3.0 * eps;
    Region::new(vec![(-0.05 - margin / 2.0, 0.05 + margin / 2.0), (PI - 0.1 - margin, PI + 0.1 + margin)]).unwrap()
}

fn torus_cloud(eps: f64) -> SampleCloud {
    sample(&torus(), eps, Some(torus_patch(eps)))
}

/// A point of `M` inside the cloud's test region, moved along a random
/// normal direction by at most `offset`.
fn near_manifold_point(cloud: &SampleCloud, manifold: &SyntheticManifold, offset: f64, rng: &mut SeededRng) -> Vec<f64> {
    let region = metrics::test_region(cloud, manifold).unwrap();
    let z = manifold.embed(&region.sample(rng)).unwrap();
    let n = manifold.normal_frame(&z).unwrap();
    let dir = n.matrix().mul_vec(&rng::unit_vector(rng, n.dim()));
    linalg::add(&z, &linalg::scale(&dir, rng::uniform_in(rng, 0.0, offset)))
}

/// A point strictly within `m * gamma` of a random sample.
fn in_support_point(cloud: &SampleCloud, rng: &mut SeededRng) -> Vec<f64> {
    loop {
        let p = cloud.point(rng::index(rng, cloud.len()));
        let x = linalg::add(p, &rng::in_ball(rng, cloud.ambient_dim(), cloud.support_radius()));
        if !cloud.neighbors(&x).is_empty() {
            return x;
        }
    }
}

fn c01_partition_of_unity() -> Outcome {
    let mut r = rng_for(1);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for cloud in [sample(&circle(2), 0.01, None), torus_cloud(0.01)] {
        for _ in 0..500 {
            let x = in_support_point(&cloud, &mut r);
            let w = weights::normalized_weights(&x, &cloud).unwrap();
            let sum: f64 = w.iter().map(|&(_, v)| v).sum();
            worst = worst.max((sum - 1.0).abs());
            count += 1;
        }
    }
    check(worst <= 1e-12, format!("max |sum omega - 1| = {worst:.3e} over {count} points (tol 1e-12)"))
}

fn eval_bits(e: &EvalResult) -> Vec<u64> {
    let mut bits: Vec<u64> = e.phi.iter().map(|v| v.to_bits()).collect();
    if let Some(l) = &e.local {
        bits.extend(l.centroid.iter().map(|v| v.to_bits()));
        bits.extend(l.split.eigenvalues.iter().map(|v| v.to_bits()));
        bits.extend(l.split.normal.matrix().as_slice().iter().map(|v| v.to_bits()));
        bits.extend(l.weights.iter().map(|&(_, w)| w.to_bits()));
        bits.push(l.split.spectral_gap.to_bits());
    }
    bits
}

fn c02_locality() -> Outcome {
    let mut r = rng_for(2);
    let cloud = torus_cloud(0.01);
    let mut mismatches = 0;
    for _ in 0..100 {
        let x = in_support_point(&cloud, &mut r);
        let local = cloud.subset(&cloud.within(&x, cloud.support_radius(), true)).unwrap();
        let a = field::evaluate(&x, &cloud).unwrap();
        let b = field::evaluate(&x, &local).unwrap();
        if a.status != b.status || eval_bits(&a) != eval_bits(&b) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches} of 100 evaluations changed after deleting samples beyond m*gamma"))
}

fn c03_basis_invariance() -> Outcome {
    let mut r = rng_for(3);
    let mut worst: f64 = 0.0;
    let trig = SyntheticManifold::trig_curve(vec![1, 2], 5).unwrap();
    for cloud in [sample(&circle(3), 0.01, None), sample(&trig, 0.01, None)] {
        for _ in 0..10 {
            let x = in_support_point(&cloud, &mut r);
            let e = field::evaluate(&x, &cloud).unwrap();
            let local = e.local.as_ref().unwrap();
            let b = &local.split.normal;
            for _ in 0..20 {
                let q = rng::orthogonal_matrix(&mut r, b.dim());
                let rotated = b.rotated_basis(&q).unwrap();
                let phi = field::field_with_basis(&x, &local.centroid, &rotated);
                worst = worst.max((linalg::norm(&phi) - e.residual()).abs());
            }
        }
    }
    check(worst <= 1e-10, format!("max | |phi_BQ| - |phi_B| | = {worst:.3e} over 400 rotations (tol 1e-10)"))
}

fn c04_covariance_spectrum() -> Outcome {
    let mut r = rng_for(4);
    let (mut trace_err, mut eig_excess, mut min_gap): (f64, f64, f64) = (0.0, f64::NEG_INFINITY, f64::INFINITY);
    for (manifold, cloud) in [(circle(3), sample(&circle(3), 0.01, None)), (torus(), torus_cloud(0.01))] {
        let m = cloud.intrinsic_dim() as f64;
        for k in 0..400 {
            let near = k % 2 == 0;
            let x = if near {
                near_manifold_point(&cloud, &manifold, cloud.eps(), &mut r)
            } else {
                in_support_point(&cloud, &mut r)
            };
            let c = field::assemble_covariance(&x, &cloud).unwrap();
            trace_err = trace_err.max((c.trace() - m).abs());
            let split = field::local_normal_frame(&c, cloud.intrinsic_dim()).unwrap();
            for &l in &split.eigenvalues {
                eig_excess = eig_excess.max(-l).max(l - 1.0);
            }
            if near {
                min_gap = min_gap.min(split.spectral_gap);
            }
        }
    }
    let pass = trace_err <= 1e-10 && eig_excess <= 1e-10 && min_gap >= 0.6;
    check(
        pass,
        format!(
            "max |trace - m| = {trace_err:.3e}, max distance of an eigenvalue outside [0, 1] = {eig_excess:.3e}, min near-manifold gap = {min_gap:.4} (need >= 0.6)"
        ),
    )
}

fn c05_packing() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let clouds = [
        ("circle", sample(&circle(2), 0.01, None)),
        ("sphere2", sample(&SyntheticManifold::sphere(1.0).unwrap(), 0.05, None)),
        ("torus3", torus_cloud(0.01)),
    ];
    for (name, cloud) in &clouds {
        for t in [1.0, 2.0] {
            let rep = sampling::verify_packing(cloud, t, 100).unwrap();
            pass &= rep.pass;
            lines.push(format!("{name} t={t}: {} <= {}", rep.max_count, rep.bound));
        }
    }
    check(pass, lines.join("; "))
}

fn c06_tangent_sanity() -> Outcome {
    let mut r = rng_for(6);
    let (mut worst_dist, mut worst_angle): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let manifolds = [circle(2), SyntheticManifold::sphere(1.0).unwrap(), torus()];
    for m in &manifolds {
        let full = Region::full(m);
        let mut pairs = 0;
        while pairs < 1000 {
            let u = full.sample(&mut r);
            let z = m.embed(&u).unwrap();
            let v: Vec<f64> = u.iter().map(|&ui| ui + rng::uniform_in(&mut r, -0.1, 0.1)).collect();
            let Ok(y) = m.embed(&v) else { continue };
            let xi = linalg::distance(&y, &z);
            if xi > 0.1 || xi == 0.0 {
                continue;
            }
            let nz = m.normal_frame(&z).unwrap();
            let off_plane = linalg::norm(&nz.project(&linalg::sub(&y, &z)));
            let angle = linalg::subspace_angle(&m.normal_frame(&y).unwrap(), &nz).unwrap();
            worst_dist = worst_dist.max(off_plane - (xi * xi / 2.0 + 1e-9));
            worst_angle = worst_angle.max(angle - (4.0 * xi + 1e-9));
            pairs += 1;
        }
    }
    check(
        worst_dist <= 0.0 && worst_angle <= 0.0,
        format!("3000 pairs; max slack used: distance {worst_dist:.3e}, angle {worst_angle:.3e} (both must be <= 0)"),
    )
}

fn angle_run(eps: f64) -> metrics::AngleStats {
    let m = circle(3);
    let cloud = sample(&m, eps, None);
    metrics::normal_angle_error(&cloud, &m, 200, eps, 7).unwrap()
}

fn c07_normal_angle() -> Outcome {
    let coarse = angle_run(0.01);
    let fine = angle_run(0.005);
    let ratio = coarse.max / fine.max;
    let pass = fine.max <= 0.5 && (1.4..=2.6).contains(&ratio) && fine.excluded == 0 && coarse.excluded == 0;
    check(
        pass,
        format!(
            "max angle {:.4e} at eps 0.005 (<= 0.5), {:.4e} at eps 0.01, ratio {ratio:.3} (in [1.4, 2.6])",
            fine.max, coarse.max
        ),
    )
}

fn hausdorff_run(manifold: &SyntheticManifold, cloud: &SampleCloud) -> metrics::HausdorffEstimate {
    metrics::hausdorff_upper(cloud, manifold, 100, 8, &ProjectionOptions::default()).unwrap()
}

fn c08_hausdorff_scaling() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    let cases: [(&str, SyntheticManifold, fn(f64) -> SampleCloud); 2] =
        [("circle", circle(2), |eps| sample(&circle(2), eps, None)), ("torus3", torus(), torus_cloud)];
    for (name, m, build) in &cases {
        let (coarse_cloud, fine_cloud) = (build(0.01), build(0.005));
        let coarse = hausdorff_run(m, &coarse_cloud);
        let fine = hausdorff_run(m, &fine_cloud);
        let gamma = coarse_cloud.gamma();
        let bound = 10.0 * (m.intrinsic_dim() as f64).powf(3.5) * gamma * gamma;
        let ratio = coarse.zero_to_manifold / fine.zero_to_manifold;
        let ok = coarse.zero_to_manifold <= bound
            && (2.5..=5.5).contains(&ratio)
            && !coarse.reliability_warning
            && !fine.reliability_warning;
        pass &= ok;
        lines.push(format!(
            "{name}: Z->M {:.3e} (bound {bound:.3e}), ratio {ratio:.3}",
            coarse.zero_to_manifold
        ));
    }
    check(pass, format!("{} (ratio in [2.5, 5.5])", lines.join("; ")))
}

struct ConvergenceStats {
    all_converged: bool,
    max_iterations: usize,
    max_residual: f64,
    median: Option<f64>,
    max_drift_excess: f64,
    max_identity_error: f64,
    max_tail_ratio: f64,
}

fn convergence_run(cloud: &SampleCloud, manifold: &SyntheticManifold, seed: u64) -> ConvergenceStats {
    let mut r = rng::seeded(seed, Stream::Metrics);
    let opts = ProjectionOptions::default();
    let mg = cloud.support_radius();
    let m = cloud.intrinsic_dim() as f64;
    let drift_bound = 10.0 * m.powf(3.5) * cloud.gamma() * cloud.gamma();
    let mut traces: Vec<ProjectionTrace> = Vec::new();
    let (mut max_drift_excess, mut max_identity_error, mut max_tail_ratio) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = cloud.point(rng::index(&mut r, cloud.len())).to_vec();
        let x0 = linalg::add(&p, &rng::in_ball(&mut r, cloud.ambient_dim(), mg));
        let trace = projector::project(&x0, cloud, &opts).unwrap();
        let nu = manifold.nearest_point(&x0).unwrap();
        for x in &trace.iterates[1..] {
            max_drift_excess = max_drift_excess.max(linalg::distance(x, &nu) - drift_bound);
        }
        for (x, &res) in trace.iterates.iter().zip(&trace.residuals) {
            if let Ok(next) = projector::step(x, cloud) {
                max_identity_error = max_identity_error.max((linalg::distance(&next, x) - res).abs());
            }
        }
        for w in trace.residuals[1..].windows(2) {
            if w[0] > opts.residual_tol {
                max_tail_ratio = max_tail_ratio.max(w[1] / w[0]);
            }
        }
        traces.push(trace);
    }
    let report = metrics::convergence_report(&traces, opts.residual_tol);
    ConvergenceStats {
        all_converged: report.failures == 0,
        max_iterations: report.max_iterations,
        max_residual: traces.iter().map(ProjectionTrace::final_residual).fold(0.0, f64::max),
        median: report.median_contraction,
        max_drift_excess,
        max_identity_error,
        max_tail_ratio,
    }
}

fn c09_projector_convergence() -> Outcome {
    let m = circle(3);
    let cloud = sample(&m, 0.005, None);
    let s = convergence_run(&cloud, &m, 9);
    let median = s.median.unwrap_or(f64::NAN);
    let pass = s.all_converged
        && s.max_iterations <= 100
        && s.max_residual <= 1e-11
        && median <= 0.5
        && s.max_drift_excess <= 0.0
        && s.max_identity_error <= 1e-12
        && s.max_tail_ratio <= 0.5;
    check(
        pass,
        format!(
            "all converged: {}, max iterations {}, max final residual {:.2e}, median contraction {median:.3e}, drift slack {:.3e}, step identity error {:.2e}, max tail ratio {:.3e}",
            s.all_converged, s.max_iterations, s.max_residual, s.max_drift_excess, s.max_identity_error, s.max_tail_ratio
        ),
    )
}

fn c10_robust_frames() -> Outcome {
    let m = circle(3);
    let exact = sample(&m, 0.005, None);
    let mg = exact.support_radius();
    let variants = [
        ("perturbed", sampling::perturb_frames(&exact, mg).unwrap()),
        ("pca", sampling::estimate_frames_pca(&exact, mg).unwrap()),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, cloud) in &variants {
        let err = sampling::frame_errors(cloud, &m).unwrap().into_iter().fold(0.0, f64::max);
        let s = convergence_run(cloud, &m, 10);
        let median = s.median.unwrap_or(f64::NAN);
        let ok = s.all_converged && median < 1.0 && (*name != "perturbed" || err <= mg + 1e-10);
        pass &= ok;
        lines.push(format!(
            "{name} (max frame error {err:.3e}): all converged {}, median contraction {median:.3e}",
            s.all_converged
        ));
    }
    check(pass, lines.join("; "))
}

fn c11_oracle_equivalence() -> Outcome {
    let mut r = rng_for(11);
    let mut eig_err: f64 = 0.0;
    for _ in 0..100 {
        let c = Matrix::from_fn(6, 6, |_, _| rng::uniform_in(&mut r, -1.0, 1.0)).symmetrized();
        let a = linalg::sym_eig(&c).unwrap();
        let b = oracles::jacobi_eig(&c);
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            eig_err = eig_err.max((x - y).abs());
        }
        eig_err = eig_err.max(a.eigenvectors.matrix().sub(b.eigenvectors.matrix()).max_abs());
    }

    let mut angle_err: f64 = 0.0;
    for pair in 0..50u64 {
        let d = 4 + (pair % 3) as usize;
        let k1 = 1 + (pair % 3) as usize;
        let k2 = k1 + rng::index(&mut r, d - k1);
        let u: Frame = rng::random_frame(&mut r, d, k1);
        let v: Frame = rng::random_frame(&mut r, d, k2);
        let exact = linalg::subspace_angle(&u, &v).unwrap();
        angle_err = angle_err.max((exact - oracles::sampled_angle(&u, &v, 10_000, pair)).abs());
    }

    let cloud = torus_cloud(0.01);
    let mut neighbor_mismatch = 0;
    for _ in 0..1000 {
        let p = cloud.point(rng::index(&mut r, cloud.len())).to_vec();
        let x = linalg::add(&p, &rng::in_ball(&mut r, 3, 2.0 * cloud.support_radius()));
        if field::neighbors(&x, &cloud) != oracles::scan_neighbors(&x, &cloud) {
            neighbor_mismatch += 1;
        }
    }

    let t = torus();
    let mut queries = vec![vec![4.5, 0.0, 0.5]];
    while queries.len() < 20 {
        queries.push(linalg::add(&t.embed(&Region::full(&t).sample(&mut r)).unwrap(), &rng::in_ball(&mut r, 3, 0.8)));
    }
    let mut nearest_err: f64 = 0.0;
    for x in &queries {
        let fast = t.nearest_point(x).unwrap();
        nearest_err = nearest_err.max(linalg::distance(&fast, &oracles::grid_nearest(&t, x, 1000)));
    }

    let pass = eig_err <= 1e-8 && angle_err <= 0.02 && neighbor_mismatch == 0 && nearest_err <= 1e-6;
    check(
        pass,
        format!(
            "sym_eig vs Jacobi {eig_err:.2e} (1e-8); angle vs sampled {angle_err:.2e} (0.02); neighbor mismatches {neighbor_mismatch}/1000; nearest point vs grid {nearest_err:.2e} (1e-6)"
        ),
    )
}

fn c12_injectivity() -> Outcome {
    let m = circle(2);
    let eps = 0.005;
    let cloud = sample(&m, eps, None);
    let rep = metrics::injectivity_check(&cloud, &m, 50, eps / 2.0, 12, &ProjectionOptions::default()).unwrap();
    let pass = rep.non_converged == 0 && rep.min_limit_distance >= eps / 4.0;
    check(
        pass,
        format!(
            "50 seeds >= {:.4} apart (min {:.4e}), min limit distance {:.4e} (need >= {:.4}), {} not converged",
            eps / 2.0,
            rep.min_seed_distance,
            rep.min_limit_distance,
            eps / 4.0,
            rep.non_converged
        ),
    )
}

fn zeroset(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_zeroset")).args(args).output().expect("binary runs")
}

fn run_pipeline(dir: &Path, tag: &str, threads: &str) -> Vec<Vec<u8>> {
    let p = |name: &str| dir.join(format!("{tag}_{name}")).to_str().unwrap().to_string();
    let (cloud, seeds, proj, trace, report) = (p("cloud.json"), p("seeds.csv"), p("proj.csv"), p("trace.json"), p("report.json"));
    let ok = |out: std::process::Output| assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    ok(zeroset(&["sample", "--manifold", "circle", "--d", "3", "--eps", "0.01", "--seed", "13", "--out", &cloud]));
    let text = fs::read_to_string(&cloud).unwrap();
    let record: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows: String = record["points"]
        .as_array()
        .unwrap()
        .iter()
        .step_by(5)
        .map(|p| format!("{},{},{}\n", p[0].as_f64().unwrap() + 0.01, p[1], p[2].as_f64().unwrap() - 0.005))
        .collect();
    fs::write(&seeds, rows).unwrap();
    ok(zeroset(&["project", "--cloud", &cloud, "--seeds", &seeds, "--out", &proj, "--trace", &trace, "--threads", threads]));
    ok(zeroset(&[
        "evaluate", "--cloud", &cloud, "--manifold", "circle", "--d", "3", "--n-points", "50", "--n-seeds", "30", "--seed",
        "13", "--out", &report,
    ]));
    [cloud, proj, trace, report].iter().map(|f| fs::read(f).unwrap()).collect()
}

fn c13_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let first = run_pipeline(dir.path(), "a", "1");
    let second = run_pipeline(dir.path(), "b", "4");
    let names = ["sample", "project", "trace", "evaluate"];
    let differing: Vec<&str> = names.iter().zip(first.iter().zip(&second)).filter(|(_, (a, b))| a != b).map(|(n, _)| *n).collect();
    check(
        differing.is_empty(),
        if differing.is_empty() {
            "sample, project (1 vs 4 threads) and evaluate outputs byte-identical across reruns".to_string()
        } else {
            format!("outputs differ: {}", differing.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("partition of unity", c01_partition_of_unity),
        ("locality", c02_locality),
        ("basis invariance", c03_basis_invariance),
        ("covariance spectrum", c04_covariance_spectrum),
        ("packing bound", c05_packing),
        ("tangent sanity", c06_tangent_sanity),
        ("normal-angle error", c07_normal_angle),
        ("Hausdorff quadratic scaling", c08_hausdorff_scaling),
        ("projector convergence", c09_projector_convergence),
        ("robustness to frame error", c10_robust_frames),
        ("oracle equivalence", c11_oracle_equivalence),
        ("injectivity smoke test", c12_injectivity),
        ("determinism", c13_determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                check(false, format!("panicked: {msg}"))
            });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

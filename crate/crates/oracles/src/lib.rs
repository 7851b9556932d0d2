//! Slow reference implementations for cross-checking `zeroset-core`.
//!
//! Only the data types are shared with the core crate. Every algorithm here
//! is written independently and favors obviousness over speed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeroset_core::{Frame, Matrix, SampleCloud, SymmetricSpectrum, SyntheticManifold};

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i][j] * a[i][j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most
/// `1e-12` (relative to the matrix norm when that exceeds 1). Output follows
/// the same ordering and sign convention as the core solver.
pub fn jacobi_eig(c: &Matrix) -> SymmetricSpectrum {
    let n = c.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (c[(i, j)] + c[(j, i)])).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale = c.frobenius_norm().max(1.0);

    for _sweep in 0..100 {
        if off_diagonal_norm(&a) <= 1e-12 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = cs * vp - sn * vq;
                    row[q] = sn * vp + cs * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[i][i]).collect();
    let columns: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i][j]).collect();
            let mut lead = 0;
            for i in 1..n {
                if col[i].abs() > col[lead].abs() {
                    lead = i;
                }
            }
            if col[lead] < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    let eigenvectors = Frame::new(Matrix::from_columns(&columns).expect("square")).expect("Jacobi keeps V orthogonal");
    SymmetricSpectrum { eigenvalues, eigenvectors }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Largest angle between a random unit vector of `col U` and `col V`, over
/// `n_dirs` Gaussian directions.
pub fn sampled_angle(u: &Frame, v: &Frame, n_dirs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d, k) = (u.ambient_dim(), u.dim());
    let (um, vm) = (u.matrix(), v.matrix());
    let mut worst: f64 = 0.0;
    for _ in 0..n_dirs {
        let g: Vec<f64> = (0..k).map(|_| standard_normal(&mut rng)).collect();
        let w: Vec<f64> = (0..d).map(|i| (0..k).map(|j| um[(i, j)] * g[j]).sum()).collect();
        let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len == 0.0 {
            continue;
        }
        let coeffs: Vec<f64> = (0..v.dim()).map(|j| (0..d).map(|i| vm[(i, j)] * w[i]).sum::<f64>()).collect();
        let proj = coeffs.iter().map(|x| x * x).sum::<f64>().sqrt();
        let along = (proj / len).min(1.0);
        worst = worst.max(along.acos());
    }
    worst
}

/// Nearest point of `manifold` to `x` by exhaustive search over a parameter
/// grid with `density` nodes per intrinsic dimension, followed by repeated
/// shrinking local grids around the incumbent.
pub fn grid_nearest(manifold: &SyntheticManifold, x: &[f64], density: usize) -> Vec<f64> {
    let domain = manifold.param_domain();
    let m = domain.len();
    let eval = |u: &[f64]| dist2(&manifold.embed(u).expect("parameter in domain"), x);

    let node = |r: usize, i: usize, n: usize| {
        let range = &domain[r];
        if range.periodic {
            range.lo + (range.hi - range.lo) * i as f64 / n as f64
        } else {
            range.lo + (range.hi - range.lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut best_u: Vec<f64> = domain.iter().map(|r| r.lo).collect();
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; m];
    let mut u = vec![0.0; m];
    'outer: loop {
        for r in 0..m {
            u[r] = node(r, idx[r], density);
        }
        let f = eval(&u);
        if f < best {
            best = f;
            best_u.clone_from(&u);
        }
        for r in 0..m {
            idx[r] += 1;
            if idx[r] < density {
                continue 'outer;
            }
            idx[r] = 0;
        }
        break;
    }

    let mut half: Vec<f64> = domain.iter().map(|r| (r.hi - r.lo) / density as f64).collect();
    const LOCAL: usize = 21;
    for _ in 0..60 {
        let center = best_u.clone();
        let mut idx = vec![0usize; m];
        'local: loop {
            for r in 0..m {
                let mut t = center[r] - half[r] + 2.0 * half[r] * idx[r] as f64 / (LOCAL - 1) as f64;
                if !domain[r].periodic {
                    t = t.clamp(domain[r].lo, domain[r].hi);
                }
                u[r] = t;
            }
            let f = eval(&u);
            if f < best {
                best = f;
                best_u.clone_from(&u);
            }
            for r in 0..m {
                idx[r] += 1;
                if idx[r] < LOCAL {
                    continue 'local;
                }
                idx[r] = 0;
            }
            break;
        }
        half.iter_mut().for_each(|h| *h *= 0.25);
    }
    manifold.embed(&best_u).expect("parameter in domain")
}

/// Indices of samples strictly within `m * gamma` of `x`, by linear scan.
pub fn scan_neighbors(x: &[f64], cloud: &SampleCloud) -> Vec<usize> {
    let r = cloud.intrinsic_dim() as f64 * cloud.gamma();
    cloud
        .points()
        .enumerate()
        .filter(|(_, p)| dist2(p, x).sqrt() < r)
        .map(|(i, _)| i)
        .collect()
}

//! Small dense linear algebra: matrices, orthonormal frames, the symmetric
//! eigendecomposition and the angle between linear subspaces.
//!
//! Dimensions here are tiny (ambient dimension rarely above 8), so everything
//! is a plain row-major `Vec<f64>`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{domain, Error, Result};

/// Frames must satisfy `F^t F = I` to this absolute tolerance.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += s * xi);
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(distance_squared(a, b))
}

pub fn distance_squared(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `self^t * other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.rows, other.rows, "tr_matmul shape mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self[(k, i)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self^t * v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "tr_mul_vec shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            axpy(&mut out, *vi, self.row(i));
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest entry of `|A - A^t|`; infinite for non-square input.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    /// Adds `s * u u^t` for a column vector `u`.
    pub fn add_outer(&mut self, s: f64, u: &[f64], v: &[f64]) {
        for i in 0..self.rows {
            let a = s * u[i];
            for j in 0..self.cols {
                self.data[i * self.cols + j] += a * v[j];
            }
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// A `d x k` matrix with orthonormal columns, representing a k-dimensional
/// linear subspace of R^d together with a basis for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    basis: Matrix,
}

impl Frame {
    /// Wraps `basis` after checking `F^t F = I` to [`ORTHONORMAL_TOL`].
    pub fn new(basis: Matrix) -> Result<Self> {
        if basis.cols() == 0 || basis.cols() > basis.rows() {
            return Err(domain(format!(
                "frame needs 1 <= k <= d columns, got {}x{}",
                basis.rows(),
                basis.cols()
            )));
        }
        let deviation = basis.tr_matmul(&basis).sub(&Matrix::identity(basis.cols())).max_abs();
        if deviation.is_nan() || deviation > ORTHONORMAL_TOL {
            return Err(domain(format!(
                "frame columns are not orthonormal (deviation {deviation:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub(crate) fn new_unchecked(basis: Matrix) -> Self {
        Self { basis }
    }

    /// Standard basis vectors `e_i` for each listed index.
    pub fn axes(d: usize, indices: &[usize]) -> Result<Self> {
        Self::new(Matrix::from_fn(d, indices.len(), |i, j| {
            if indices[j] == i {
                1.0
            } else {
                0.0
            }
        }))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_matrix(self) -> Matrix {
        self.basis
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.basis.column(j)
    }

    /// Coordinates `F^t v` of `v` in this basis.
    pub fn coords(&self, v: &[f64]) -> Vec<f64> {
        self.basis.tr_mul_vec(v)
    }

    /// Orthogonal projection `F F^t v` onto the subspace.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.basis.mul_vec(&self.coords(v))
    }

    /// Same subspace with basis `F Q` for an orthogonal `k x k` matrix `Q`.
    pub fn rotated_basis(&self, q: &Matrix) -> Result<Self> {
        if q.rows() != self.dim() || q.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: q.rows(),
            });
        }
        Self::new(self.basis.matmul(q))
    }

    /// Applies an ambient orthogonal map: `Q F`.
    pub fn transformed(&self, q: &Matrix) -> Result<Self> {
        Self::new(q.matmul(&self.basis))
    }

    /// An orthonormal basis of the orthogonal complement. `None` when the
    /// frame already spans R^d.
    pub fn complement(&self) -> Option<Self> {
        let d = self.ambient_dim();
        let k = self.dim();
        if k == d {
            return None;
        }
        let mut basis: Vec<Vec<f64>> = (0..k).map(|j| self.column(j)).collect();
        let mut out = Vec::with_capacity(d - k);
        let mut used = vec![false; d];
        while out.len() < d - k {
            // Pick the axis with the largest residual against the current basis.
            let mut best: Option<(usize, Vec<f64>, f64)> = None;
            for (axis, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
                let mut r = vec![0.0; d];
                r[axis] = 1.0;
                for _ in 0..2 {
                    for b in &basis {
                        let c = dot(b, &r);
                        axpy(&mut r, -c, b);
                    }
                }
                let n = norm(&r);
                if best.as_ref().is_none_or(|(_, _, bn)| n > *bn) {
                    best = Some((axis, r, n));
                }
            }
            let (axis, r, n) = best.expect("an unused axis remains");
            used[axis] = true;
            let unit = scale(&r, 1.0 / n);
            basis.push(unit.clone());
            out.push(unit);
        }
        Some(Self::new_unchecked(
            Matrix::from_columns(&out).expect("columns share a length"),
        ))
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors as the
/// columns of a `d x d` frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Frame,
}

impl SymmetricSpectrum {
    /// The eigenvectors belonging to the `k` smallest eigenvalues.
    pub fn least_dominant(&self, k: usize) -> Frame {
        self.columns(0..k)
    }

    /// The eigenvectors belonging to the `k` largest eigenvalues, still in
    /// ascending eigenvalue order.
    pub fn most_dominant(&self, k: usize) -> Frame {
        let d = self.eigenvalues.len();
        self.columns(d - k..d)
    }

    fn columns(&self, range: core::ops::Range<usize>) -> Frame {
        let m = self.eigenvectors.matrix();
        let start = range.start;
        Frame::new_unchecked(Matrix::from_fn(m.rows(), range.len(), |i, j| {
            m[(i, start + j)]
        }))
    }
}

/// Symmetric eigendecomposition by Householder tridiagonalization followed by
/// the implicit QL algorithm.
///
/// The input is symmetrized as `(C + C^t) / 2`. Eigenvalues come back in
/// ascending order; each eigenvector is signed so that its largest-magnitude
/// entry (lowest index on ties) is positive, which makes the output a
/// deterministic function of the input.
pub fn sym_eig(c: &Matrix) -> Result<SymmetricSpectrum> {
    let n = c.rows();
    if n != c.cols() {
        return Err(domain(format!("sym_eig needs a square matrix, got {}x{}", c.rows(), c.cols())));
    }
    if n == 0 {
        return Err(domain("sym_eig needs a non-empty matrix"));
    }
    if !c.is_finite() {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let a = c.symmetrized();
    let mut v = a.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e);
    tridiagonal_ql(n, &mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::from_fn(n, n, |i, j| v[i * n + order[j]]);
    for j in 0..n {
        let mut pivot = 0;
        for i in 1..n {
            if vectors[(i, j)].abs() > vectors[(pivot, j)].abs() {
                pivot = i;
            }
        }
        if vectors[(pivot, j)] < 0.0 {
            for i in 0..n {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
    Ok(SymmetricSpectrum {
        eigenvalues,
        eigenvectors: Frame::new_unchecked(vectors),
    })
}

/// Householder reduction to tridiagonal form. On exit `v` holds the
/// accumulated orthogonal transform (row-major), `d` the diagonal and `e` the
/// subdiagonal in `e[1..]`.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iterations on the tridiagonal matrix left by
/// [`tridiagonalize`], accumulating rotations into `v`.
fn tridiagonal_ql(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    const MAX_SWEEPS: usize = 64;
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::Numeric("QL iteration did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[at(k, i + 1)];
                        v[at(k, i + 1)] = s * v[at(k, i)] + c * h;
                        v[at(k, i)] = c * v[at(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Largest principal angle between `col U` and `col V`, in `[0, pi/2]`.
///
/// Requires `dim U <= dim V`. The sine of the angle is the largest singular
/// value of `(I - V V^t) U`; its cosine is the smallest singular value of
/// `V^t U`. Combining both through `atan2` keeps full precision at either end
/// of the range.
pub fn subspace_angle(u: &Frame, v: &Frame) -> Result<f64> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            found: v.ambient_dim(),
        });
    }
    if u.dim() > v.dim() {
        return Err(domain(format!(
            "subspace angle needs dim U <= dim V, got {} > {}",
            u.dim(),
            v.dim()
        )));
    }
    let overlap = v.matrix().tr_matmul(u.matrix());
    let residual = u.matrix().sub(&v.matrix().matmul(&overlap));
    let sin2 = sym_eig(&residual.tr_matmul(&residual))?
        .eigenvalues
        .last()
        .copied()
        .unwrap_or(0.0);
    let cos2 = sym_eig(&overlap.tr_matmul(&overlap))?.eigenvalues[0];
    let angle = libm::atan2(libm::sqrt(sin2.max(0.0)), libm::sqrt(cos2.max(0.0)));
    Ok(angle.clamp(0.0, core::f64::consts::FRAC_PI_2))
}

/// Modified Gram-Schmidt (with one re-orthogonalization pass) on the given
/// column vectors.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Result<Frame> {
    let d = vectors.first().map(Vec::len).ok_or_else(|| domain("no vectors"))?;
    if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    if vectors.len() > d {
        return Err(Error::RankDeficient);
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let input_norm = norm(v);
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &r);
                axpy(&mut r, -c, q);
            }
        }
        let n = norm(&r);
        if !(n >= 1e-10 * input_norm) || n == 0.0 {
            return Err(Error::RankDeficient);
        }
        out.push(scale(&r, 1.0 / n));
    }
    Ok(Frame::new_unchecked(Matrix::from_columns(&out)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use core::f64::consts::FRAC_PI_2;

    fn line(d: usize, v: &[f64]) -> Frame {
        assert_eq!(v.len(), d);
        orthonormalize(&[v.to_vec()]).unwrap()
    }

    #[test]
    fn eig_of_diagonal() {
        let s = sym_eig(&Matrix::diagonal(&[0.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0]);
        assert_eq!(s.eigenvectors.matrix(), &Matrix::identity(2));
    }

    #[test]
    fn eig_of_scalar_matrix() {
        let s = sym_eig(&Matrix::identity(2).scaled(0.5)).unwrap();
        assert!((s.eigenvalues[0] - 0.5).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 0.5).abs() < 1e-15);
        let v = s.eigenvectors.matrix();
        let gram = v.tr_matmul(v).sub(&Matrix::identity(2)).max_abs();
        assert!(gram < 1e-14);
        for j in 0..2 {
            let col = v.column(j);
            let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(pivot > 0.0);
        }
    }

    #[test]
    fn eig_reconstructs_random_matrices() {
        let mut r = rng::seeded(11, rng::Stream::Metrics);
        for n in 1..=8 {
            let g = Matrix::from_fn(n, n, |_, _| rng::normal(&mut r));
            let c = g.tr_matmul(&g).sub(&Matrix::identity(n));
            let s = sym_eig(&c).unwrap();
            for w in s.eigenvalues.windows(2) {
                assert!(w[0] <= w[1]);
            }
            let v = s.eigenvectors.matrix();
            let rebuilt = v.matmul(&Matrix::diagonal(&s.eigenvalues)).matmul(&v.transpose());
            let err = rebuilt.sub(&c).max_abs();
            assert!(err <= 1e-9 * c.max_abs().max(1.0), "n={n} err={err}");
            assert!(v.tr_matmul(v).sub(&Matrix::identity(n)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn eig_is_deterministic() {
        let mut r = rng::seeded(3, rng::Stream::Metrics);
        let g = Matrix::from_fn(5, 5, |_, _| rng::normal(&mut r));
        let c = g.tr_matmul(&g);
        let a = sym_eig(&c).unwrap();
        let b = sym_eig(&c).unwrap();
        let bits = |s: &SymmetricSpectrum| -> Vec<u64> {
            s.eigenvalues
                .iter()
                .chain(s.eigenvectors.matrix().as_slice())
                .map(|x| x.to_bits())
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn eig_rejects_non_finite() {
        let mut c = Matrix::identity(3);
        c[(1, 2)] = f64::NAN;
        assert!(matches!(sym_eig(&c), Err(Error::Numeric(_))));
    }

    #[test]
    fn angle_examples() {
        let e1 = line(2, &[1.0, 0.0]);
        let e2 = line(2, &[0.0, 1.0]);
        assert!(subspace_angle(&e1, &e1).unwrap().abs() < 1e-15);
        assert!((subspace_angle(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let rotated = line(2, &[libm::cos(0.3), libm::sin(0.3)]);
        assert!((subspace_angle(&e1, &rotated).unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn angle_line_against_plane() {
        let plane = Frame::axes(3, &[0, 1]).unwrap();
        let tilted = line(3, &[libm::cos(0.2), 0.0, libm::sin(0.2)]);
        assert!((subspace_angle(&tilted, &plane).unwrap() - 0.2).abs() < 1e-14);
        assert!(matches!(subspace_angle(&plane, &tilted), Err(Error::Domain(_))));
    }

    #[test]
    fn tiny_angles_keep_precision() {
        let e1 = line(3, &[1.0, 0.0, 0.0]);
        let t = 1e-9;
        let v = line(3, &[libm::cos(t), 0.0, libm::sin(t)]);
        let a = subspace_angle(&e1, &v).unwrap();
        assert!((a - t).abs() < 1e-18, "{a}");
    }

    #[test]
    fn gram_schmidt_examples() {
        let f = orthonormalize(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(f.matrix(), &Matrix::identity(2));

        let f = orthonormalize(&[vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let expected = [[h, h, 0.0], [h, -h, 0.0]];
        for (j, col) in expected.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                assert!((f.matrix()[(i, j)] - x).abs() < 1e-15);
            }
        }

        assert_eq!(
            orthonormalize(&[vec![1.0, 0.0], vec![2.0, 0.0]]),
            Err(Error::RankDeficient)
        );
    }

    #[test]
    fn gram_schmidt_preserves_span() {
        let mut r = rng::seeded(5, rng::Stream::Metrics);
        let vs: Vec<Vec<f64>> = (0..3).map(|_| rng::gaussian_vector(&mut r, 6)).collect();
        let f = orthonormalize(&vs).unwrap();
        for v in &vs {
            assert!(distance(v, &f.project(v)) < 1e-10);
        }
    }

    #[test]
    fn complement_is_orthogonal() {
        let mut r = rng::seeded(8, rng::Stream::Metrics);
        let f = rng::random_frame(&mut r, 5, 2);
        let c = f.complement().unwrap();
        assert_eq!(c.dim(), 3);
        assert!(f.matrix().tr_matmul(c.matrix()).max_abs() < 1e-12);
        assert!(Frame::new(c.matrix().clone()).is_ok());
        assert!(Frame::axes(2, &[0, 1]).unwrap().complement().is_none());
    }

    #[test]
    fn frame_rejects_non_orthonormal() {
        let m = Matrix::from_row_major(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(Frame::new(m).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn angle_symmetric_for_equal_dims(seed in any::<u64>(), d in 2usize..7, k in 1usize..3) {
                prop_assume!(k <= d);
                let mut r = rng::seeded(seed, rng::Stream::Metrics);
                let u = rng::random_frame(&mut r, d, k);
                let v = rng::random_frame(&mut r, d, k);
                let a = subspace_angle(&u, &v).unwrap();
                let b = subspace_angle(&v, &u).unwrap();
                prop_assert!((a - b).abs() <= 1e-10);
            }

            #[test]
            fn angle_rotation_invariant(seed in any::<u64>(), d in 2usize..7) {
                let mut r = rng::seeded(seed, rng::Stream::Metrics);
                let k1 = 1 + rng::index(&mut r, d);
                let k2 = k1 + rng::index(&mut r, d - k1 + 1);
                let u = rng::random_frame(&mut r, d, k1);
                let v = rng::random_frame(&mut r, d, k2);
                let q = rng::orthogonal_matrix(&mut r, d);
                let a = subspace_angle(&u, &v).unwrap();
                let b = subspace_angle(&u.transformed(&q).unwrap(), &v.transformed(&q).unwrap()).unwrap();
                prop_assert!((a - b).abs() <= 1e-9);
                prop_assert!((0.0..=FRAC_PI_2).contains(&a));
            }
        }
    }
}

//! Uniform hash grid over the first (up to three) coordinates.
//!
//! Projection onto a coordinate subspace never increases distances, so
//! scanning the projected cells around a query and then filtering by the true
//! Euclidean distance gives exact radius queries in any dimension.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::linalg;

const KEY_DIMS: usize = 3;

type CellKey = [i64; KEY_DIMS];

#[derive(Debug, Clone, PartialEq)]
pub struct GridIndex {
    cell: f64,
    key_dims: usize,
    cells: BTreeMap<CellKey, Vec<u32>>,
}

impl GridIndex {
    /// Empty index for points of dimension `d`; `cell` must be positive.
    pub fn new(d: usize, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell size must be positive");
        Self {
            cell,
            key_dims: d.min(KEY_DIMS),
            cells: BTreeMap::new(),
        }
    }

    pub fn build(d: usize, cell: f64, points: &[f64]) -> Self {
        let mut index = Self::new(d, cell);
        for (i, p) in points.chunks_exact(d).enumerate() {
            index.insert(i, p);
        }
        index
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn key(&self, p: &[f64]) -> CellKey {
        let mut key = [0i64; KEY_DIMS];
        for (k, x) in key.iter_mut().zip(p).take(self.key_dims) {
            *k = libm::floor(x / self.cell) as i64;
        }
        key
    }

    pub fn insert(&mut self, index: usize, p: &[f64]) {
        let key = self.key(p);
        self.cells.entry(key).or_default().push(index as u32);
    }

    /// Calls `visit` for every indexed point whose cell lies within
    /// `radius` of `x` along the key coordinates, starting with the cell of
    /// `x` itself. Stops early when `visit` returns true.
    fn scan(&self, x: &[f64], radius: f64, mut visit: impl FnMut(usize) -> bool) {
        let reach = libm::ceil(radius / self.cell) as i64;
        let center = self.key(x);
        if let Some(members) = self.cells.get(&center) {
            if members.iter().any(|&i| visit(i as usize)) {
                return;
            }
        }
        let mut lo = [0i64; KEY_DIMS];
        let mut hi = [0i64; KEY_DIMS];
        for k in 0..self.key_dims {
            lo[k] = center[k] - reach;
            hi[k] = center[k] + reach;
        }
        let mut cursor = lo;
        loop {
            if cursor != center {
                if let Some(members) = self.cells.get(&cursor) {
                    if members.iter().any(|&i| visit(i as usize)) {
                        return;
                    }
                }
            }
            // odometer increment over the key box
            let mut k = 0;
            loop {
                if k == self.key_dims {
                    return;
                }
                if cursor[k] < hi[k] {
                    cursor[k] += 1;
                    break;
                }
                cursor[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Indices (ascending) of points with `|x - p| < radius`, or `<= radius`
    /// when `inclusive` is set.
    pub fn query(&self, points: &[f64], d: usize, x: &[f64], radius: f64, inclusive: bool) -> Vec<usize> {
        let mut out = Vec::new();
        if !(radius > 0.0) || x.iter().any(|v| !v.is_finite()) {
            return out;
        }
        let r2 = radius * radius;
        self.scan(x, radius, |i| {
            let d2 = linalg::distance_squared(x, &points[i * d..(i + 1) * d]);
            if d2 < r2 || (inclusive && d2 <= r2) {
                out.push(i);
            }
            false
        });
        out.sort_unstable();
        out
    }

    /// Whether any indexed point lies closer than `radius` to `x` (or at
    /// exactly `radius` when `inclusive` is set).
    pub fn any_within(&self, points: &[f64], d: usize, x: &[f64], radius: f64, inclusive: bool) -> bool {
        if !(radius > 0.0) || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let r2 = radius * radius;
        let mut found = false;
        self.scan(x, radius, |i| {
            let d2 = linalg::distance_squared(x, &points[i * d..(i + 1) * d]);
            found = d2 < r2 || (inclusive && d2 <= r2);
            found
        });
        found
    }
}

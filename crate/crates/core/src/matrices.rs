//! Square real matrices with banded or compressed-row storage, the Toeplitz
//! and diagonal-sampling generators, principal blocks and banded LU.
//!
//! Indices are 0-based and ranges half-open throughout the API.

use crate::dense::{CMatrix, DenseMatrix};
use crate::symbols::{Symbol, SymbolError};
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("range {start}..{end} out of bounds for dimension {dim}")]
    RangeOutOfBounds { start: usize, end: usize, dim: usize },
    #[error("entry ({row}, {col}) outside a {dim}x{dim} matrix")]
    EntryOutOfBounds { row: usize, col: usize, dim: usize },
    #[error("matrix is singular: no nonzero pivot in column {column}")]
    Singular { column: usize },
    #[error("matrix declared hermitian is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("complex entry with imaginary part {imag:e}; only real matrices are stored")]
    ComplexEntry { imag: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Hermitian,
    General,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major band: entry (i, j) lives at `i * (lower + upper + 1) + j + lower - i`.
    Band {
        lower: usize,
        upper: usize,
        data: Vec<f64>,
    },
    Csr {
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
}

/// Square real matrix with known lower/upper bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMatrix {
    dim: usize,
    lower: usize,
    upper: usize,
    symmetry: Symmetry,
    storage: Storage,
}

impl StructuredMatrix {
    /// Assembles from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped. A `Hermitian` request is checked to a relative
    /// 1e-12 and then symmetrized so the stored matrix is exactly symmetric.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        symmetry: Symmetry,
    ) -> Result<Self, MatrixError> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(MatrixError::EntryOutOfBounds { row: i, col: j, dim });
            }
            rows[i].push((j, v));
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            *row = merged;
        }
        if symmetry == Symmetry::Hermitian {
            symmetrize_rows(&mut rows)?;
        }
        Ok(Self::from_sorted_rows(dim, rows, symmetry))
    }

    /// Builds from a generator over the band |i - j| within (lower, upper).
    pub fn from_band_fn(
        dim: usize,
        lower: usize,
        upper: usize,
        symmetry: Symmetry,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, MatrixError> {
        let mut trip = Vec::new();
        for i in 0..dim {
            let lo = i.saturating_sub(lower);
            let hi = (i + upper).min(dim.saturating_sub(1));
            for j in lo..=hi {
                trip.push((i, j, f(i, j)));
            }
        }
        Self::from_triplets(dim, trip, symmetry)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, 1.0)), Symmetry::Hermitian)
            .expect("identity is well formed")
    }

    pub fn from_dense(m: &DenseMatrix, symmetry: Symmetry) -> Result<Self, MatrixError> {
        if !m.is_square() {
            return Err(MatrixError::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let n = m.rows();
        let trip = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, m[(i, j)]));
        Self::from_triplets(n, trip, symmetry)
    }

    /// Picks band storage when it costs at most three times the nonzero count.
    fn from_sorted_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>, symmetry: Symmetry) -> Self {
        let mut lower = 0;
        let mut upper = 0;
        let mut nnz = 0;
        for (i, row) in rows.iter().enumerate() {
            nnz += row.len();
            if let (Some(first), Some(last)) = (row.first(), row.last()) {
                lower = lower.max(i.saturating_sub(first.0));
                upper = upper.max(last.0.saturating_sub(i));
            }
        }
        let width = lower + upper + 1;
        let storage = if width * dim <= 3 * nnz.max(dim) {
            let mut data = vec![0.0; width * dim];
            for (i, row) in rows.iter().enumerate() {
                for &(j, v) in row {
                    data[i * width + j + lower - i] = v;
                }
            }
            Storage::Band { lower, upper, data }
        } else {
            let mut row_ptr = Vec::with_capacity(dim + 1);
            let mut cols = Vec::with_capacity(nnz);
            let mut vals = Vec::with_capacity(nnz);
            row_ptr.push(0);
            for row in rows {
                for (j, v) in row {
                    cols.push(j);
                    vals.push(v);
                }
                row_ptr.push(cols.len());
            }
            Storage::Csr { row_ptr, cols, vals }
        };
        Self {
            dim,
            lower,
            upper,
            symmetry,
            storage,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn is_hermitian(&self) -> bool {
        self.symmetry == Symmetry::Hermitian
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    /// Smallest b with all entries zero outside |i - j| <= b.
    pub fn bandwidth(&self) -> usize {
        self.lower.max(self.upper)
    }

    pub fn is_band_storage(&self) -> bool {
        matches!(self.storage, Storage::Band { .. })
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Band { data, .. } => data.iter().filter(|v| **v != 0.0).count(),
            Storage::Csr { vals, .. } => vals.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "index out of bounds");
        match &self.storage {
            Storage::Band { lower, upper, data } => {
                if j + lower < i || j > i + upper {
                    0.0
                } else {
                    data[i * (lower + upper + 1) + j + lower - i]
                }
            }
            Storage::Csr { row_ptr, cols, vals } => {
                let span = row_ptr[i]..row_ptr[i + 1];
                match cols[span.clone()].binary_search(&j) {
                    Ok(k) => vals[span.start + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Calls `f(col, value)` for every stored entry of row `i`.
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match &self.storage {
            Storage::Band { lower, upper, data } => {
                let w = lower + upper + 1;
                let lo = i.saturating_sub(*lower);
                let hi = (i + upper).min(self.dim - 1);
                for j in lo..=hi {
                    let v = data[i * w + j + lower - i];
                    if v != 0.0 {
                        f(j, v);
                    }
                }
            }
            Storage::Csr { row_ptr, cols, vals } => {
                for k in row_ptr[i]..row_ptr[i + 1] {
                    f(cols[k], vals[k]);
                }
            }
        }
    }

    fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        match &self.storage {
            Storage::Band { lower, upper, data } => {
                let w = lower + upper + 1;
                let lo = i.saturating_sub(*lower);
                let hi = (i + upper).min(self.dim - 1);
                let row = &data[i * w + lo + lower - i..=i * w + hi + lower - i];
                row.iter().zip(&v[lo..=hi]).map(|(a, b)| a * b).sum()
            }
            Storage::Csr { row_ptr, cols, vals } => (row_ptr[i]..row_ptr[i + 1])
                .map(|k| vals[k] * v[cols[k]])
                .sum(),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, MatrixError> {
        let mut out = vec![0.0; self.dim];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<(), MatrixError> {
        self.check_len(v.len())?;
        self.check_len(out.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(i, v);
        }
        Ok(())
    }

    /// Rows `rows` of the product, written to `out[k]` for row `rows.start + k`.
    pub fn matvec_rows(&self, rows: Range<usize>, v: &[f64], out: &mut [f64]) -> Result<(), MatrixError> {
        self.check_len(v.len())?;
        self.check_range(&rows)?;
        if out.len() != rows.len() {
            return Err(MatrixError::DimensionMismatch {
                expected: rows.len(),
                got: out.len(),
            });
        }
        for (o, i) in out.iter_mut().zip(rows) {
            *o = self.row_dot(i, v);
        }
        Ok(())
    }

    /// The principal submatrix on `range`, keeping the symmetry flag.
    pub fn principal_block(&self, range: Range<usize>) -> Result<Self, MatrixError> {
        self.check_range(&range)?;
        let start = range.start;
        let size = range.len();
        let mut rows = vec![Vec::new(); size];
        for (k, row) in rows.iter_mut().enumerate() {
            self.for_each_in_row(start + k, |j, v| {
                if range.contains(&j) {
                    row.push((j - start, v));
                }
            });
        }
        Ok(Self::from_sorted_rows(size, rows, self.symmetry))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            self.for_each_in_row(i, |j, v| m[(i, j)] = v);
        }
        m
    }

    /// All stored entries as (row, col, value), row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            self.for_each_in_row(i, |j, v| out.push((i, j, v)));
        }
        out
    }

    fn check_len(&self, len: usize) -> Result<(), MatrixError> {
        if len == self.dim {
            Ok(())
        } else {
            Err(MatrixError::DimensionMismatch {
                expected: self.dim,
                got: len,
            })
        }
    }

    fn check_range(&self, r: &Range<usize>) -> Result<(), MatrixError> {
        if r.start < r.end && r.end <= self.dim {
            Ok(())
        } else {
            Err(MatrixError::RangeOutOfBounds {
                start: r.start,
                end: r.end,
                dim: self.dim,
            })
        }
    }
}

fn symmetrize_rows(rows: &mut [Vec<(usize, f64)>]) -> Result<(), MatrixError> {
    let lookup = |rows: &[Vec<(usize, f64)>], i: usize, j: usize| -> f64 {
        match rows[i].binary_search_by_key(&j, |e| e.0) {
            Ok(k) => rows[i][k].1,
            Err(_) => 0.0,
        }
    };
    let scale = rows
        .iter()
        .flatten()
        .fold(0.0_f64, |m, e| m.max(e.1.abs()));
    let mut defect: f64 = 0.0;
    for i in 0..rows.len() {
        for &(j, v) in &rows[i] {
            defect = defect.max((v - lookup(rows, j, i)).abs());
        }
    }
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(MatrixError::NotSymmetric { defect });
    }
    if defect > 0.0 {
        let snapshot = rows.to_vec();
        for (i, row) in rows.iter_mut().enumerate() {
            for e in row.iter_mut() {
                e.1 = 0.5 * (e.1 + lookup(&snapshot, e.0, i));
            }
        }
    }
    Ok(())
}

/// Block Toeplitz matrix [f_{i-j}] with `coeffs[k + m] = f_k` for k in -m..=m.
/// Every coefficient block must be real; the result is flagged hermitian
/// when f_{-k} = f_k^T for all k.
pub fn toeplitz(coeffs: &[CMatrix], n: usize) -> Result<StructuredMatrix, MatrixError> {
    if coeffs.len() % 2 == 0 {
        return Err(MatrixError::InvalidArgument(
            "coefficients must be indexed -m..=m".into(),
        ));
    }
    let m = coeffs.len() / 2;
    let s = coeffs[0].size();
    if coeffs.iter().any(|c| c.size() != s) {
        return Err(MatrixError::InvalidArgument("coefficient blocks differ in size".into()));
    }
    let scale = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.max_abs()));
    for c in coeffs {
        for a in 0..s {
            for b in 0..s {
                let im = c[(a, b)].im;
                if im.abs() > 1e-12 * scale.max(1.0) {
                    return Err(MatrixError::ComplexEntry { imag: im });
                }
            }
        }
    }
    let hermitian = (0..=m).all(|k| {
        coeffs[m - k].max_abs_diff(&coeffs[m + k].conj_transpose()) <= 1e-14 * scale.max(1.0)
    });
    let symmetry = if hermitian {
        Symmetry::Hermitian
    } else {
        Symmetry::General
    };
    let dim = n * s;
    let mut trip = Vec::new();
    for bi in 0..n {
        let lo = bi.saturating_sub(m);
        let hi = (bi + m).min(n - 1);
        for bj in lo..=hi {
            let k = bi as isize - bj as isize;
            let block = &coeffs[(k + m as isize) as usize];
            for a in 0..s {
                for b in 0..s {
                    trip.push((bi * s + a, bj * s + b, block[(a, b)].re));
                }
            }
        }
    }
    StructuredMatrix::from_triplets(dim, trip, symmetry)
}

/// Block diagonal matrix with i-th block a(i/n), i = 1..n.
pub fn diag_sampling(a: &Symbol, n: usize) -> Result<StructuredMatrix, MatrixError> {
    if a.depends_on_theta() || a.spatial_dim() != 1 {
        return Err(MatrixError::InvalidArgument(format!(
            "diagonal sampling needs a univariate x-only symbol, got '{}'",
            a.label()
        )));
    }
    let s = a.size();
    let mut trip = Vec::new();
    let mut hermitian = true;
    for i in 1..=n {
        let block = a.eval(&[i as f64 / n as f64], &[0.0])?;
        hermitian &= block.hermitian_defect() == 0.0;
        for r in 0..s {
            for c in 0..s {
                let v = block[(r, c)];
                if v.im != 0.0 {
                    return Err(MatrixError::ComplexEntry { imag: v.im });
                }
                trip.push(((i - 1) * s + r, (i - 1) * s + c, v.re));
            }
        }
    }
    let symmetry = if hermitian {
        Symmetry::Hermitian
    } else {
        Symmetry::General
    };
    StructuredMatrix::from_triplets(n * s, trip, symmetry)
}

/// Banded LU with partial pivoting. Row k of U spans columns
/// k..=k + lower + upper after fill from row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    dim: usize,
    lower: usize,
    upper: usize,
    /// Row i holds columns i - lower ..= i + lower + upper.
    rows: Vec<f64>,
    /// Multipliers of elimination step k at `k * lower + (i - k - 1)`.
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(m: &StructuredMatrix) -> Result<Self, MatrixError> {
        let n = m.dim();
        let kl = m.lower_bandwidth().min(n.saturating_sub(1));
        let ku = m.upper_bandwidth().min(n.saturating_sub(1));
        let w = 2 * kl + ku + 1;
        let mut rows = vec![0.0; n * w];
        // Column c of row i sits at i * w + c + kl - i.
        for i in 0..n {
            m.for_each_in_row(i, |j, v| rows[i * w + j + kl - i] = v);
        }
        let mut multipliers = vec![0.0; n * kl];
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let right = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = rows[k * w + kl].abs();
            for i in k + 1..=last {
                let v = rows[i * w + k + kl - i].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(MatrixError::Singular { column: k });
            }
            pivots[k] = p;
            if p != k {
                for c in k..=right {
                    rows.swap(k * w + c + kl - k, p * w + c + kl - p);
                }
            }
            let pivot = rows[k * w + kl];
            let (head, tail) = rows.split_at_mut((k + 1) * w);
            let pivot_row = &head[k * w + kl + 1..=k * w + kl + (right - k)];
            for i in k + 1..=last {
                let base = (i - k - 1) * w;
                let f = tail[base + k + kl - i] / pivot;
                multipliers[k * kl + i - k - 1] = f;
                if f == 0.0 {
                    continue;
                }
                tail[base + k + kl - i] = 0.0;
                let target = &mut tail[base + k + 1 + kl - i..=base + right + kl - i];
                for (t, u) in target.iter_mut().zip(pivot_row) {
                    *t -= f * u;
                }
            }
        }
        Ok(Self {
            dim: n,
            lower: kl,
            upper: ku,
            rows,
            multipliers,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper bandwidth of U including pivoting fill.
    pub fn fill_bandwidth(&self) -> usize {
        self.lower + self.upper
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, MatrixError> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<(), MatrixError> {
        let n = self.dim;
        if x.len() != n {
            return Err(MatrixError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let kl = self.lower;
        let w = 2 * kl + self.upper + 1;
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    x[i] -= self.multipliers[k * kl + i - k - 1] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let right = (k + kl + self.upper).min(n - 1);
            let row = &self.rows[k * w + kl..=k * w + kl + (right - k)];
            let s: f64 = row[1..].iter().zip(&x[k + 1..=right]).map(|(u, v)| u * v).sum();
            x[k] = (x[k] - s) / row[0];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tridiag(n: usize) -> StructuredMatrix {
        StructuredMatrix::from_band_fn(n, 1, 1, Symmetry::Hermitian, |i, j| {
            if i == j {
                2.0
            } else {
                -1.0
            }
        })
        .unwrap()
    }

    fn scalar_coeffs(vals: &[f64]) -> Vec<CMatrix> {
        vals.iter().map(|v| CMatrix::real_scalar(*v)).collect()
    }

    #[test]
    fn toeplitz_from_second_difference_coefficients() {
        let t = toeplitz(&scalar_coeffs(&[-1.0, 2.0, -1.0]), 4).unwrap();
        assert_eq!(t, tridiag(4));
        assert!(t.is_hermitian());
        assert_eq!(t.bandwidth(), 1);
    }

    #[test]
    fn toeplitz_abs_theta_truncated() {
        let pi = std::f64::consts::PI;
        let f1 = -2.0 / pi;
        let t = toeplitz(&scalar_coeffs(&[0.0, f1, pi / 2.0, f1, 0.0]), 3).unwrap();
        let want = DenseMatrix::from_rows(&[
            vec![pi / 2.0, f1, 0.0],
            vec![f1, pi / 2.0, f1],
            vec![0.0, f1, pi / 2.0],
        ]);
        assert_eq!(t.to_dense(), want);
    }

    #[test]
    fn block_toeplitz_places_blocks() {
        let third = |v: f64| Complex64::new(v / 3.0, 0.0);
        let f0 = CMatrix::from_rows(&[vec![third(4.0), third(-2.0)], vec![third(-2.0), third(8.0)]]);
        let f1 = CMatrix::from_rows(&[vec![third(0.0), third(-2.0)], vec![third(0.0), third(-2.0)]]);
        let fm1 = f1.conj_transpose();
        let t = toeplitz(&[fm1, f0, f1], 2).unwrap();
        assert_eq!(t.dim(), 4);
        assert!(t.is_hermitian());
        assert!((t.get(0, 0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((t.get(3, 3) - 8.0 / 3.0).abs() < 1e-15);
        // block (1,0) = f_1
        assert!((t.get(2, 1) + 2.0 / 3.0).abs() < 1e-15);
        assert!((t.get(3, 1) + 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.get(2, 0), 0.0);
    }

    #[test]
    fn toeplitz_rejects_complex_coefficients() {
        let c = vec![
            CMatrix::scalar(Complex64::new(0.0, 1.0)),
            CMatrix::real_scalar(1.0),
            CMatrix::scalar(Complex64::new(0.0, -1.0)),
        ];
        assert!(matches!(toeplitz(&c, 3), Err(MatrixError::ComplexEntry { .. })));
    }

    #[test]
    fn diag_sampling_examples() {
        let one = Symbol::constant(1.0, 1);
        assert_eq!(diag_sampling(&one, 3).unwrap(), StructuredMatrix::identity(3));
        let x = Symbol::coefficient("x", 1, |x| x[0]);
        let d = diag_sampling(&x, 4).unwrap();
        for (i, v) in [0.25, 0.5, 0.75, 1.0].iter().enumerate() {
            assert_eq!(d.get(i, i), *v);
        }
        let chi = Symbol::characteristic(0.0, 0.5);
        let d = diag_sampling(&chi, 4).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| d.get(i, i)).collect();
        assert_eq!(diag, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn matvec_examples() {
        let t = tridiag(3);
        assert_eq!(t.matvec(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 0.0, 1.0]);
        let v = vec![0.3, -1.0, 2.0, 5.0];
        assert_eq!(StructuredMatrix::identity(4).matvec(&v).unwrap(), v);
        assert!(matches!(
            t.matvec(&[1.0]),
            Err(MatrixError::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn band_lu_examples() {
        let id = BandLu::factor(&StructuredMatrix::identity(3)).unwrap();
        assert_eq!(id.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);

        let t = tridiag(5);
        let x: Vec<f64> = (1..=5).map(f64::from).collect();
        let b = t.matvec(&x).unwrap();
        let got = BandLu::factor(&t).unwrap().solve(&b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).abs() < 1e-12);
        }

        let zero = StructuredMatrix::from_triplets(3, Vec::new(), Symmetry::Hermitian).unwrap();
        assert!(matches!(BandLu::factor(&zero), Err(MatrixError::Singular { column: 0 })));
    }

    #[test]
    fn band_lu_needs_pivoting() {
        // Zero leading entry forces a row interchange.
        let m = StructuredMatrix::from_dense(
            &DenseMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 1.0]]),
            Symmetry::General,
        )
        .unwrap();
        let f = BandLu::factor(&m).unwrap();
        let x = f.solve(&[1.0, 2.0, 3.0]).unwrap();
        let r = m.matvec(&x).unwrap();
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(f.fill_bandwidth(), 2);
    }

    #[test]
    fn principal_block_of_tridiagonal() {
        let t = tridiag(5);
        assert_eq!(t.principal_block(0..5).unwrap(), t);
        assert_eq!(t.principal_block(1..4).unwrap(), tridiag(3));
        assert!(t.principal_block(3..7).is_err());
    }

    #[test]
    fn storage_choice_follows_sparsity() {
        assert!(tridiag(50).is_band_storage());
        // Checkerboard-sparse full matrix prefers compressed rows.
        let n = 40;
        let trip = (0..n).flat_map(|i| (0..n).filter(move |j| (i + j) % 2 == 0).map(move |j| (i, j, 1.0)));
        let m = StructuredMatrix::from_triplets(n, trip, Symmetry::Hermitian).unwrap();
        assert!(!m.is_band_storage());
        assert_eq!(m.bandwidth(), n - 2);
        let dense = m.to_dense();
        let v: Vec<f64> = (0..n).map(|i| i as f64).collect();
        assert_eq!(m.matvec(&v).unwrap(), dense.matvec(&v));
    }

    #[test]
    fn hermitian_request_rejects_asymmetric_input() {
        let r = StructuredMatrix::from_triplets(2, vec![(0, 1, 1.0)], Symmetry::Hermitian);
        assert!(matches!(r, Err(MatrixError::NotSymmetric { .. })));
    }

    #[test]
    fn matvec_rows_matches_full_product() {
        let t = tridiag(6);
        let v: Vec<f64> = (0..6).map(|i| (i * i) as f64).collect();
        let full = t.matvec(&v).unwrap();
        let mut part = vec![0.0; 3];
        t.matvec_rows(2..5, &v, &mut part).unwrap();
        assert_eq!(part, full[2..5]);
    }
}

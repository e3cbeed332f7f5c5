//! Dense eigenvalues, eigenvalue-vs-symbol comparison and clustering counts.

use crate::dense::DenseMatrix;
use crate::matrices::StructuredMatrix;
use crate::schwarz::{SchwarzError, SchwarzPreconditioner, DENSE_GUARD};
use crate::symbols::{symbol_eig_branches, Symbol, SymbolError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds the dense guard {guard}")]
    TooLarge { dim: usize, guard: usize },
    #[error("QR iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("symbol has {symbol} branches but s = {s}")]
    BranchMismatch { s: usize, symbol: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Schwarz(#[from] SchwarzError),
}

/// All eigenvalues of a dense square matrix. Symmetric input (to a relative
/// 1e-12) goes to the tridiagonal QL solver and returns real values sorted
/// ascending; anything else goes through balancing, Hessenberg reduction and
/// shifted QR.
pub fn eigenvalues_dense(m: &DenseMatrix) -> Result<Vec<Complex64>, SpectraError> {
    if !m.is_square() {
        return Err(SpectraError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() > DENSE_GUARD {
        return Err(SpectraError::TooLarge {
            dim: m.rows(),
            guard: DENSE_GUARD,
        });
    }
    if m.max_asymmetry() <= 1e-12 * m.max_abs() {
        Ok(symmetric_eigenvalues(m)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    } else {
        general_eigenvalues(m)
    }
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>, SpectraError> {
    let n = m.rows();
    if n != m.cols() {
        return Err(SpectraError::NotSquare { rows: n, cols: m.cols() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let (mut d, mut e) = tridiagonalize(&mut a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Householder reduction to tridiagonal form; returns (diagonal, off-diagonal)
/// with e[0] = 0 and e[i] coupling rows i-1 and i.
fn tridiagonalize(a: &mut DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let a = a.as_mut_slice();
    let at = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[at(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[at(i, l)];
            } else {
                for k in 0..=l {
                    a[at(i, k)] /= scale;
                    h += a[at(i, k)] * a[at(i, k)];
                }
                let f = a[at(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[at(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[at(j, k)] * a[at(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[at(k, j)] * a[at(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[at(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[at(j, k)] -= f * e[k] + g * a[at(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[at(i, l)];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[at(i, i)];
    }
    e[0] = 0.0;
    (d, e)
}

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues left in `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<(), SpectraError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let limit = 100 * n.max(1);
    let mut sweeps = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > limit {
                return Err(SpectraError::NoConvergence { sweeps: limit });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                let r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of a general real matrix, in the order QR deflates them.
pub fn general_eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>, SpectraError> {
    let n = m.rows();
    if n != m.cols() {
        return Err(SpectraError::NotSquare { rows: n, cols: m.cols() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a);
    hessenberg_qr(&mut a)
}

fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let a = a.as_mut_slice();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].abs();
                    r += a[i * n + j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[i * n + j] /= f;
                    a[j * n + i] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.rows();
    let a = a.as_mut_slice();
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let xnorm = (k + 1..n).map(|i| a[i * n + k] * a[i * n + k]).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let alpha = if x0 > 0.0 { -xnorm } else { xnorm };
        for t in 0..len {
            v[t] = a[(k + 1 + t) * n + k];
        }
        v[0] -= alpha;
        let vn2: f64 = v[..len].iter().map(|x| x * x).sum();
        if vn2 == 0.0 {
            continue;
        }
        let scale = 2.0 / vn2;
        // Left: rows k+1.. of A -= v (v^T A) * scale.
        s.iter_mut().for_each(|x| *x = 0.0);
        for t in 0..len {
            let row = &a[(k + 1 + t) * n..(k + 2 + t) * n];
            for j in k..n {
                s[j] += v[t] * row[j];
            }
        }
        for t in 0..len {
            let row = &mut a[(k + 1 + t) * n..(k + 2 + t) * n];
            for j in k..n {
                row[j] -= scale * v[t] * s[j];
            }
        }
        // Right: columns k+1.. of A -= (A v) v^T * scale.
        for i in 0..n {
            let row = &mut a[i * n..(i + 1) * n];
            let dotv: f64 = (0..len).map(|t| row[k + 1 + t] * v[t]).sum();
            for t in 0..len {
                row[k + 1 + t] -= scale * dotv * v[t];
            }
        }
        a[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            a[i * n + k] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
fn hessenberg_qr(h: &mut DenseMatrix) -> Result<Vec<Complex64>, SpectraError> {
    let n = h.rows();
    let raw = h.as_mut_slice();
    // 1-based accessors keep the classic index arithmetic readable.
    macro_rules! a {
        ($i:expr, $j:expr) => {
            raw[($i - 1) * n + ($j - 1)]
        };
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a!(i, j).abs();
        }
    }
    let limit = 100 * n;
    let mut sweeps = 0;
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a!(l - 1, l - 1).abs() + a!(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a!(l, l - 1).abs() <= f64::EPSILON * s {
                    a!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a!(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a!(nn - 1, nn - 1);
            let mut w = a!(nn, nn - 1) * a!(nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }
            sweeps += 1;
            if sweeps > limit {
                return Err(SpectraError::NoConvergence { sweeps: limit });
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift.
                t += x;
                for i in 1..=nn {
                    a!(i, i) -= x;
                }
                let s = a!(nn, nn - 1).abs() + a!(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r, mut z);
            let mut m = nn - 2;
            loop {
                z = a!(m, m);
                r = x - z;
                let s = y - z;
                p = (r * s - w) / a!(m + 1, m) + a!(m, m + 1);
                q = a!(m + 1, m + 1) - z - r - s;
                r = a!(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a!(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a!(m - 1, m - 1).abs() + z.abs() + a!(m + 1, m + 1).abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a!(i, i - 2) = 0.0;
                if i != m + 2 {
                    a!(i, i - 3) = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = a!(k, k - 1);
                    q = a!(k + 1, k - 1);
                    r = if k != nn - 1 { a!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a!(k, k - 1) = -a!(k, k - 1);
                        }
                    } else {
                        a!(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a!(k, j) + q * a!(k + 1, j);
                        if k != nn - 1 {
                            pp += r * a!(k + 2, j);
                            a!(k + 2, j) -= pp * z;
                        }
                        a!(k + 1, j) -= pp * y;
                        a!(k, j) -= pp * x;
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a!(i, k) + y * a!(i, k + 1);
                        if k != nn - 1 {
                            pp += z * a!(i, k + 2);
                            a!(i, k + 2) -= pp * r;
                        }
                        a!(i, k + 1) -= pp * q;
                        a!(i, k) -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Which operator `operator_spectrum` diagonalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    /// A itself.
    Matrix,
    /// P, as reciprocals of the eigenvalues of P^{-1}.
    Precond,
    /// P^{-1} A.
    PrecondApplied,
    /// I - P^{-1} A.
    Iteration,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::Matrix => "matrix",
            Operator::Precond => "precond",
            Operator::PrecondApplied => "precond-applied",
            Operator::Iteration => "iteration",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = SpectraError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Operator::Matrix, Operator::Precond, Operator::PrecondApplied, Operator::Iteration]
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| SpectraError::InvalidArgument(format!("unknown operator '{s}'")))
    }
}

pub fn matrix_spectrum(a: &StructuredMatrix) -> Result<Vec<Complex64>, SpectraError> {
    if a.dim() > DENSE_GUARD {
        return Err(SpectraError::TooLarge {
            dim: a.dim(),
            guard: DENSE_GUARD,
        });
    }
    eigenvalues_dense(&a.to_dense())
}

pub fn operator_spectrum(pre: &SchwarzPreconditioner<'_>, which: Operator) -> Result<Vec<Complex64>, SpectraError> {
    match which {
        Operator::Matrix => matrix_spectrum(pre.matrix()),
        Operator::Precond => Ok(eigenvalues_dense(&pre.dense_inverse_image()?)?
            .into_iter()
            .map(|z| z.inv())
            .collect()),
        Operator::PrecondApplied => eigenvalues_dense(&pre.dense_preconditioned()?),
        Operator::Iteration => eigenvalues_dense(&pre.dense_iteration()?),
    }
}

/// Branch-wise comparison of a spectrum with the symbol's eigenvalue
/// functions sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub dim: usize,
    pub s: usize,
    /// Mean absolute error per branch over the pairs kept after trimming.
    pub branch_mean_error: Vec<f64>,
    pub branch_max_error: Vec<f64>,
    pub trimmed: usize,
    /// Eigenvalues dropped by trimming.
    pub outliers: Vec<f64>,
    /// Eigenvalues whose imaginary part exceeded 1e-8 before being dropped.
    pub imag_discarded: usize,
}

impl DistributionReport {
    pub fn mean_error(&self) -> f64 {
        self.branch_mean_error.iter().sum::<f64>() / self.s as f64
    }
}

/// Trimming budget ceil(4 sqrt(dim)).
pub fn trim_budget(dim: usize) -> usize {
    (4.0 * (dim as f64).sqrt()).ceil() as usize
}

fn resample(sorted: &[f64], len: usize) -> Vec<f64> {
    let m = sorted.len();
    (0..len)
        .map(|j| {
            let t = ((j as f64 + 0.5) * m as f64 / len as f64 - 0.5).clamp(0.0, (m - 1) as f64);
            let i = t.floor() as usize;
            let frac = t - i as f64;
            if i + 1 < m {
                sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
            } else {
                sorted[i]
            }
        })
        .collect()
}

/// Reference values aligned with the ascending eigenvalues of a matrix of
/// dimension `dim`: the sorted spectrum is cut into `s` consecutive groups
/// (the first dim mod s one larger) and group i is paired with the sorted
/// samples of branch i resampled to the group's length.
pub fn symbol_reference(
    sym: &Symbol,
    dim: usize,
    n_x: usize,
    n_theta: usize,
) -> Result<Vec<(usize, f64)>, SpectraError> {
    let s = sym.size();
    if dim < s {
        return Err(SpectraError::InvalidArgument(format!(
            "{dim} eigenvalues cannot fill {s} branches"
        )));
    }
    let samples = symbol_eig_branches(sym, n_x, n_theta)?;
    let mut out = Vec::with_capacity(dim);
    for (b, branch) in samples.branch_values.iter().enumerate() {
        let len = dim / s + usize::from(b < dim % s);
        out.extend(resample(branch, len).into_iter().map(|v| (b, v)));
    }
    Ok(out)
}

/// Grid sizes giving about `dim / s` samples per branch.
pub fn default_grid(sym: &Symbol, dim: usize) -> (usize, usize) {
    let per_branch = dim.div_ceil(sym.size()).max(1);
    if sym.depends_on_x() {
        let side = (per_branch as f64).sqrt().ceil() as usize;
        (side, side)
    } else {
        (1, per_branch)
    }
}

pub fn compare_to_symbol(
    eigs: &[Complex64],
    sym: &Symbol,
    s: usize,
    n_x: usize,
    n_theta: usize,
) -> Result<DistributionReport, SpectraError> {
    if s != sym.size() {
        return Err(SpectraError::BranchMismatch { s, symbol: sym.size() });
    }
    let dim = eigs.len();
    let imag_discarded = eigs.iter().filter(|z| z.im.abs() > 1e-8).count();
    let mut real: Vec<f64> = eigs.iter().map(|z| z.re).collect();
    real.sort_by(f64::total_cmp);
    // (branch, eigenvalue, error) per pair.
    let pairs: Vec<(usize, f64, f64)> = symbol_reference(sym, dim, n_x, n_theta)?
        .into_iter()
        .zip(&real)
        .map(|((b, v), e)| (b, *e, (e - v).abs()))
        .collect();
    let trimmed = trim_budget(dim).min(dim.saturating_sub(s));
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&i, &j| pairs[j].2.total_cmp(&pairs[i].2));
    let mut dropped = vec![false; pairs.len()];
    let mut outliers = Vec::with_capacity(trimmed);
    for &i in &order[..trimmed] {
        dropped[i] = true;
        outliers.push(pairs[i].1);
    }
    let mut sum = vec![0.0; s];
    let mut count = vec![0usize; s];
    let mut max = vec![0.0f64; s];
    for ((b, _, err), gone) in pairs.iter().zip(&dropped) {
        if !gone {
            sum[*b] += err;
            count[*b] += 1;
            max[*b] = max[*b].max(*err);
        }
    }
    let branch_mean_error = sum
        .iter()
        .zip(&count)
        .map(|(s, c)| if *c == 0 { 0.0 } else { s / *c as f64 })
        .collect();
    Ok(DistributionReport {
        dim,
        s,
        branch_mean_error,
        branch_max_error: max,
        trimmed,
        outliers,
        imag_discarded,
    })
}

/// Outlier counts #{j : |lambda_j - 1| > eps} per eps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub dim: usize,
    pub center: f64,
    pub eps: Vec<f64>,
    pub counts: Vec<usize>,
    pub fractions: Vec<f64>,
}

pub fn cluster_count(eigs: &[Complex64], eps: &[f64]) -> ClusterReport {
    cluster_count_around(eigs, 1.0, eps)
}

pub fn cluster_count_around(eigs: &[Complex64], center: f64, eps: &[f64]) -> ClusterReport {
    let dist: Vec<f64> = eigs.iter().map(|z| (z - center).norm()).collect();
    let counts: Vec<usize> = eps.iter().map(|e| dist.iter().filter(|d| **d > *e).count()).collect();
    let dim = eigs.len();
    let fractions = counts
        .iter()
        .map(|c| if dim == 0 { 0.0 } else { *c as f64 / dim as f64 })
        .collect();
    ClusterReport {
        dim,
        center,
        eps: eps.to_vec(),
        counts,
        fractions,
    }
}

/// Writes `re,im` rows.
pub fn write_eigenvalues_csv<W: std::io::Write>(eigs: &[Complex64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "re,im")?;
    for z in eigs {
        writeln!(w, "{:e},{:e}", z.re, z.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn tridiag(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        })
    }

    #[test]
    fn diagonal_and_rotation() {
        let d = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 2.0]]);
        let e = eigenvalues_dense(&d).unwrap();
        assert_eq!(e.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
        let r = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let e = sorted_re(eigenvalues_dense(&r).unwrap());
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn tridiagonal_toeplitz_symmetric_and_general_paths() {
        let m = tridiag(5);
        let want: Vec<f64> = (1..=5).map(|j| 2.0 - 2.0 * (j as f64 * PI / 6.0).cos()).collect();
        let sym = symmetric_eigenvalues(&m).unwrap();
        let gen = sorted_re(general_eigenvalues(&m).unwrap());
        for j in 0..5 {
            assert!((sym[j] - want[j]).abs() < 1e-12);
            assert!((gen[j].re - want[j]).abs() < 1e-12 && gen[j].im.abs() < 1e-12);
        }
    }

    #[test]
    fn general_matrix_complex_pair() {
        // Companion matrix of (x - 2)(x^2 + 2x + 5): roots 2, -1 +- 2i.
        let m = DenseMatrix::from_rows(&[vec![0.0, 0.0, 10.0], vec![1.0, 0.0, -1.0], vec![0.0, 1.0, 0.0]]);
        let e = sorted_re(eigenvalues_dense(&m).unwrap());
        assert!((e[0] - Complex64::new(-1.0, -2.0)).norm() < 1e-12);
        assert!((e[1] - Complex64::new(-1.0, 2.0)).norm() < 1e-12);
        assert!((e[2] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn self_comparison_is_exact() {
        let sym = Symbol::laplacian();
        let samples = symbol_eig_branches(&sym, 1, 50).unwrap();
        let eigs: Vec<Complex64> = samples.branch_values[0].iter().rev().map(|v| Complex64::new(*v, 0.0)).collect();
        let r = compare_to_symbol(&eigs, &sym, 1, 1, 50).unwrap();
        assert!(r.branch_max_error[0] < 1e-15);
        assert!(r.trimmed <= trim_budget(50));
    }

    #[test]
    fn branch_count_must_match() {
        let eigs = vec![Complex64::new(1.0, 0.0); 10];
        assert!(matches!(
            compare_to_symbol(&eigs, &Symbol::laplacian(), 2, 1, 10),
            Err(SpectraError::BranchMismatch { .. })
        ));
    }

    #[test]
    fn tridiagonal_spectrum_against_its_symbol() {
        let err = |n: usize| {
            let eigs: Vec<Complex64> = (1..=n)
                .map(|j| Complex64::new(2.0 - 2.0 * (j as f64 * PI / (n + 1) as f64).cos(), 0.0))
                .collect();
            compare_to_symbol(&eigs, &Symbol::laplacian(), 1, 1, n).unwrap().branch_mean_error[0]
        };
        assert!(err(100) <= 0.02);
        assert!(err(200) < err(100));
    }

    #[test]
    fn cluster_counts() {
        let ones = vec![Complex64::new(1.0, 0.0); 7];
        assert_eq!(cluster_count(&ones, &[0.1, 0.05]).counts, vec![0, 0]);
        let eigs = vec![Complex64::new(1.0, 0.2), Complex64::new(0.5, 0.0), Complex64::new(1.04, 0.0)];
        let r = cluster_count(&eigs, &[0.01, 0.1, 0.3]);
        assert_eq!(r.counts, vec![3, 2, 1]);
        assert!((r.fractions[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn operator_names_round_trip() {
        for o in [Operator::Matrix, Operator::Precond, Operator::PrecondApplied, Operator::Iteration] {
            assert_eq!(o.name().parse::<Operator>().unwrap(), o);
        }
    }
}

//! Conjugate gradients and GMRES with optional left preconditioning.
//!
//! Both start from x = 0. CG stops on the true residual ||b - Ax|| <=
//! tol ||b||; GMRES stops on the preconditioned least-squares residual
//! <= tol ||P^{-1} b|| and recomputes the true residual at exit.

use crate::matrices::{MatrixError, StructuredMatrix};
use serde::Serialize;

/// Anything that can apply z = P^{-1} r.
pub trait Preconditioner: Sync {
    fn dim(&self) -> usize;
    fn apply_inverse_into(&self, r: &[f64], z: &mut [f64]);
    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Iteration cap; `None` means dim(A).
    pub cap: Option<usize>,
    /// GMRES restart length; `None` runs full GMRES.
    pub restart: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            cap: None,
            restart: None,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn with_restart(mut self, restart: usize) -> Self {
        self.restart = Some(restart);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: String,
    pub precond: String,
    pub iterations: usize,
    pub converged: bool,
    /// True when CG hit a non-positive curvature or r^T z and ran to the cap.
    pub breakdown: bool,
    /// Relative residual per iteration: true residual for CG, the
    /// preconditioned least-squares estimate for GMRES.
    pub residual_history: Vec<f64>,
    /// ||b - Ax|| / ||b|| at exit.
    pub final_residual: f64,
    pub cap: usize,
    pub dim: usize,
    #[serde(skip)]
    pub solution: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check(a: &StructuredMatrix, b: &[f64], p: Option<&dyn Preconditioner>) -> Result<(), MatrixError> {
    if b.len() != a.dim() {
        return Err(MatrixError::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        });
    }
    if let Some(p) = p {
        if p.dim() != a.dim() {
            return Err(MatrixError::DimensionMismatch {
                expected: a.dim(),
                got: p.dim(),
            });
        }
    }
    if b.iter().all(|v| *v == 0.0) {
        return Err(MatrixError::InvalidArgument("right-hand side is zero".into()));
    }
    Ok(())
}

fn precondition(p: Option<&dyn Preconditioner>, r: &[f64], z: &mut [f64]) {
    match p {
        Some(p) => p.apply_inverse_into(r, z),
        None => z.copy_from_slice(r),
    }
}

fn label(p: Option<&dyn Preconditioner>) -> String {
    p.map_or_else(|| "none".to_string(), |p| p.describe())
}

fn true_residual(a: &StructuredMatrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.matvec(x).expect("dimension checked");
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    norm(&r) / norm(b)
}

/// Preconditioned conjugate gradients.
///
/// A breakdown (p^T A p <= 0 or r^T z <= 0, typical of a non-symmetric P)
/// is reported as `iterations = cap` with `converged = false` unless the
/// tolerance was already met.
pub fn cg(
    a: &StructuredMatrix,
    b: &[f64],
    p: Option<&dyn Preconditioner>,
    opts: &SolverOptions,
) -> Result<SolveReport, MatrixError> {
    check(a, b, p)?;
    let n = a.dim();
    let cap = opts.cap.unwrap_or(n);
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut ax = vec![0.0; n];
    precondition(p, &r, &mut z);
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    let report = |iterations, converged, breakdown, history, x: Vec<f64>| SolveReport {
        method: "cg".into(),
        precond: label(p),
        iterations,
        converged,
        breakdown,
        residual_history: history,
        final_residual: true_residual(a, b, &x),
        cap,
        dim: n,
        solution: x,
    };
    if rz <= 0.0 {
        return Ok(report(cap, false, true, history, x));
    }
    for it in 1..=cap {
        a.matvec_into(&dir, &mut ap)?;
        let curv = dot(&dir, &ap);
        if curv <= 0.0 {
            return Ok(report(cap, false, true, history, x));
        }
        let alpha = rz / curv;
        for i in 0..n {
            x[i] += alpha * dir[i];
            r[i] -= alpha * ap[i];
        }
        a.matvec_into(&x, &mut ax)?;
        let res = b.iter().zip(&ax).map(|(b, v)| (b - v) * (b - v)).sum::<f64>().sqrt() / bnorm;
        history.push(res);
        if res <= opts.tol {
            return Ok(report(it, true, false, history, x));
        }
        precondition(p, &r, &mut z);
        let rz_next = dot(&r, &z);
        if rz_next <= 0.0 {
            return Ok(report(cap, false, true, history, x));
        }
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            dir[i] = z[i] + beta * dir[i];
        }
    }
    Ok(report(cap, false, false, history, x))
}

/// Left-preconditioned GMRES, modified Gram-Schmidt Arnoldi with Givens
/// rotations. A happy breakdown counts as convergence.
pub fn gmres(
    a: &StructuredMatrix,
    b: &[f64],
    p: Option<&dyn Preconditioner>,
    opts: &SolverOptions,
) -> Result<SolveReport, MatrixError> {
    check(a, b, p)?;
    let n = a.dim();
    let cap = opts.cap.unwrap_or(n);
    let cycle = opts.restart.unwrap_or(cap).clamp(1, cap.max(1));
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    precondition(p, b, &mut w);
    let target = opts.tol * norm(&w);
    let pbnorm = norm(&w);
    let mut history = Vec::new();
    let mut total = 0;
    let mut converged = false;

    while total < cap && !converged {
        // r = P^{-1}(b - A x)
        a.matvec_into(&x, &mut tmp)?;
        tmp.iter_mut().zip(b).for_each(|(t, b)| *t = b - *t);
        precondition(p, &tmp, &mut w);
        let beta = norm(&w);
        if beta <= target {
            converged = true;
            break;
        }
        let m = cycle.min(cap - total);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(w.iter().map(|v| v / beta).collect());
        // Column k of the Hessenberg matrix, already rotated.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m {
            a.matvec_into(&basis[k], &mut tmp)?;
            precondition(p, &tmp, &mut w);
            let mut col = vec![0.0; k + 2];
            for (j, v) in basis.iter().enumerate() {
                let hj = dot(&w, v);
                col[j] = hj;
                w.iter_mut().zip(v).for_each(|(w, v)| *w -= hj * v);
            }
            let sub = norm(&w);
            col[k + 1] = sub;
            for (j, &(c, s)) in cs.iter().enumerate() {
                let (u, v) = (col[j], col[j + 1]);
                col[j] = c * u + s * v;
                col[j + 1] = -s * u + c * v;
            }
            let rho = col[k].hypot(col[k + 1]);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (col[k] / rho, col[k + 1] / rho) };
            col[k] = rho;
            col[k + 1] = 0.0;
            cs.push((c, s));
            g[k + 1] = -s * g[k];
            g[k] *= c;
            h.push(col);
            k += 1;
            total += 1;
            let est = g[k].abs();
            history.push(est / pbnorm);
            let happy = sub <= 1e-14 * beta;
            if est <= target || happy {
                converged = true;
                break;
            }
            basis.push(w.iter().map(|v| v / sub).collect());
        }
        // Back substitution on the k x k triangle.
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (yj, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(x, v)| *x += yj * v);
        }
    }

    let final_residual = true_residual(a, b, &x);
    Ok(SolveReport {
        method: "gmres".into(),
        precond: label(p),
        iterations: total,
        converged,
        breakdown: false,
        residual_history: history,
        final_residual,
        cap,
        dim: n,
        solution: x,
    })
}

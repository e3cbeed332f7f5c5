//! Block Jacobi, block Gauss-Seidel and the additive/multiplicative Schwarz
//! preconditioners with full or restricted prolongation.
//!
//! Additive kinds apply z = sum_i W_i^T A_i^{-1} R_i r. Multiplicative kinds
//! run one sweep on A z = r from z = 0, subdomain 1 first:
//! z <- z + W_i^T A_i^{-1} R_i (r - A z).

use crate::dense::DenseMatrix;
use crate::krylov::Preconditioner;
use crate::matrices::{BandLu, MatrixError, StructuredMatrix};
use crate::partition::{operators, Partition, SubdomainOperators, WeightScheme};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Largest dimension for which dense images are formed.
pub const DENSE_GUARD: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchwarzError {
    #[error("{kind} requires zero overlap (got {overlap})")]
    OverlapNotAllowed { kind: Kind, overlap: usize },
    #[error("{kind} uses full prolongation; scheme '{scheme}' is not available")]
    SchemeNotAllowed { kind: Kind, scheme: WeightScheme },
    #[error("partition covers {partition} indices but the matrix has dimension {matrix}")]
    DimensionMismatch { partition: usize, matrix: usize },
    #[error("local block of subdomain {subdomain} is singular: {source}")]
    SingularBlock { subdomain: usize, source: MatrixError },
    #[error("dense image of dimension {dim} exceeds the guard {guard}")]
    TooLarge { dim: usize, guard: usize },
    #[error("unknown preconditioner kind '{0}'")]
    UnknownKind(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Bj,
    Bgs,
    Bas,
    Bms,
    Bras,
    Brms,
}

impl Kind {
    pub const ALL: [Kind; 6] = [Kind::Bj, Kind::Bgs, Kind::Bas, Kind::Bms, Kind::Bras, Kind::Brms];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Bj => "bj",
            Kind::Bgs => "bgs",
            Kind::Bas => "bas",
            Kind::Bms => "bms",
            Kind::Bras => "bras",
            Kind::Brms => "brms",
        }
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, Kind::Bgs | Kind::Bms | Kind::Brms)
    }

    /// Block Jacobi and block Gauss-Seidel are the zero-overlap cases.
    pub fn requires_zero_overlap(self) -> bool {
        matches!(self, Kind::Bj | Kind::Bgs)
    }

    pub fn default_scheme(self) -> WeightScheme {
        match self {
            Kind::Bras | Kind::Brms => WeightScheme::Restricted,
            _ => WeightScheme::Full,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = SchwarzError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let low = s.to_ascii_lowercase();
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == low)
            .ok_or_else(|| SchwarzError::UnknownKind(s.to_string()))
    }
}

/// Order of the multiplicative sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    #[default]
    Forward,
    Reverse,
}

/// A factored preconditioner bound to its matrix.
pub struct SchwarzPreconditioner<'a> {
    kind: Kind,
    partition: Partition,
    ops: SubdomainOperators,
    factors: Vec<BandLu>,
    matrix: &'a StructuredMatrix,
    order: SweepOrder,
}

impl fmt::Debug for SchwarzPreconditioner<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchwarzPreconditioner")
            .field("kind", &self.kind)
            .field("scheme", &self.ops.scheme())
            .field("nu", &self.partition.nu())
            .field("overlap", &self.partition.overlap())
            .finish()
    }
}

/// Factors every local block A[Omega_i, Omega_i]. `scheme = None` takes the
/// kind's default prolongation.
pub fn setup<'a>(
    a: &'a StructuredMatrix,
    partition: &Partition,
    kind: Kind,
    scheme: Option<WeightScheme>,
) -> Result<SchwarzPreconditioner<'a>, SchwarzError> {
    if partition.dim() != a.dim() {
        return Err(SchwarzError::DimensionMismatch {
            partition: partition.dim(),
            matrix: a.dim(),
        });
    }
    if kind.requires_zero_overlap() && partition.overlap() != 0 {
        return Err(SchwarzError::OverlapNotAllowed {
            kind,
            overlap: partition.overlap(),
        });
    }
    let scheme = scheme.unwrap_or(kind.default_scheme());
    if kind.requires_zero_overlap() && scheme != WeightScheme::Full {
        return Err(SchwarzError::SchemeNotAllowed { kind, scheme });
    }
    let ops = operators(partition, scheme);
    let factors = partition
        .extended()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let block = a.principal_block(r.clone())?;
            BandLu::factor(&block).map_err(|source| SchwarzError::SingularBlock { subdomain: i, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SchwarzPreconditioner {
        kind,
        partition: partition.clone(),
        ops,
        factors,
        matrix: a,
        order: SweepOrder::Forward,
    })
}

impl<'a> SchwarzPreconditioner<'a> {
    pub fn with_order(mut self, order: SweepOrder) -> Self {
        self.order = order;
        self
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn scheme(&self) -> WeightScheme {
        self.ops.scheme()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn matrix(&self) -> &'a StructuredMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Dimensions of the factored local blocks.
    pub fn local_dims(&self) -> Vec<usize> {
        self.factors.iter().map(BandLu::dim).collect()
    }

    fn sweep(&self) -> Vec<usize> {
        let nu = self.factors.len();
        match self.order {
            SweepOrder::Forward => (0..nu).collect(),
            SweepOrder::Reverse => (0..nu).rev().collect(),
        }
    }

    fn check(&self, len: usize) -> Result<(), SchwarzError> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(MatrixError::DimensionMismatch {
                expected: self.dim(),
                got: len,
            }
            .into())
        }
    }

    /// A_i^{-1} R_i v.
    fn local_solve(&self, i: usize, v: &[f64]) -> Vec<f64> {
        let mut local = self.ops.gather(i, v);
        self.factors[i]
            .solve_in_place(&mut local)
            .expect("local dimension matches its factor");
        local
    }

    /// z = P^{-1} r.
    pub fn apply_inverse(&self, r: &[f64]) -> Result<Vec<f64>, SchwarzError> {
        self.check(r.len())?;
        let mut z = vec![0.0; self.dim()];
        if self.kind.is_multiplicative() {
            let mut residual = Vec::new();
            for (step, i) in self.sweep().into_iter().enumerate() {
                let range = self.ops.range(i);
                let local = if step == 0 {
                    self.local_solve(i, r)
                } else {
                    residual.resize(range.len(), 0.0);
                    self.matrix.matvec_rows(range.clone(), &z, &mut residual)?;
                    for (d, g) in residual.iter_mut().zip(range) {
                        *d = r[g] - *d;
                    }
                    self.factors[i].solve_in_place(&mut residual)?;
                    residual.clone()
                };
                self.ops.scatter_add(i, &local, &mut z);
            }
        } else {
            for i in 0..self.factors.len() {
                let local = self.local_solve(i, r);
                self.ops.scatter_add(i, &local, &mut z);
            }
        }
        Ok(z)
    }

    /// T v = v - P^{-1} A v.
    pub fn apply_iteration(&self, v: &[f64]) -> Result<Vec<f64>, SchwarzError> {
        let av = self.matrix.matvec(v)?;
        let z = self.apply_inverse(&av)?;
        Ok(v.iter().zip(&z).map(|(a, b)| a - b).collect())
    }

    /// T v through the explicit operator form: the product
    /// prod_i (I - W_i^T A_i^{-1} R_i A) for multiplicative kinds, and
    /// I - sum_i W_i^T A_i^{-1} R_i A for additive kinds.
    pub fn apply_iteration_explicit(&self, v: &[f64]) -> Result<Vec<f64>, SchwarzError> {
        self.check(v.len())?;
        if self.kind.is_multiplicative() {
            let mut e = v.to_vec();
            for i in self.sweep() {
                let range = self.ops.range(i);
                let mut local = vec![0.0; range.len()];
                self.matrix.matvec_rows(range, &e, &mut local)?;
                self.factors[i].solve_in_place(&mut local)?;
                let mut corr = vec![0.0; e.len()];
                self.ops.scatter_add(i, &local, &mut corr);
                e.iter_mut().zip(&corr).for_each(|(a, c)| *a -= c);
            }
            Ok(e)
        } else {
            let av = self.matrix.matvec(v)?;
            let mut out = v.to_vec();
            for i in 0..self.factors.len() {
                let local = self.local_solve(i, &av);
                let mut corr = vec![0.0; out.len()];
                self.ops.scatter_add(i, &local, &mut corr);
                out.iter_mut().zip(&corr).for_each(|(a, c)| *a -= c);
            }
            Ok(out)
        }
    }

    fn dense_columns(&self, f: impl Fn(&[f64]) -> Result<Vec<f64>, SchwarzError> + Sync) -> Result<DenseMatrix, SchwarzError> {
        let n = self.dim();
        if n > DENSE_GUARD {
            return Err(SchwarzError::TooLarge {
                dim: n,
                guard: DENSE_GUARD,
            });
        }
        let cols = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                f(&e)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DenseMatrix::from_columns(&cols))
    }

    /// Dense P^{-1}, column j = P^{-1} e_j.
    pub fn dense_inverse_image(&self) -> Result<DenseMatrix, SchwarzError> {
        self.dense_columns(|e| self.apply_inverse(e))
    }

    /// Dense P^{-1} A.
    pub fn dense_preconditioned(&self) -> Result<DenseMatrix, SchwarzError> {
        self.dense_columns(|e| self.apply_inverse(&self.matrix.matvec(e)?))
    }

    /// Dense iteration operator I - P^{-1} A.
    pub fn dense_iteration(&self) -> Result<DenseMatrix, SchwarzError> {
        self.dense_columns(|e| self.apply_iteration(e))
    }
}

impl Preconditioner for SchwarzPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn apply_inverse_into(&self, r: &[f64], z: &mut [f64]) {
        let out = self.apply_inverse(r).expect("preconditioner dimension checked by caller");
        z.copy_from_slice(&out);
    }

    fn describe(&self) -> String {
        format!(
            "{}(nu={}, o={}, weights={})",
            self.kind,
            self.partition.nu(),
            self.partition.overlap(),
            self.ops.scheme()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, Family, ProblemSpec};
    use crate::partition::make_partition;

    fn matrix(family: Family, n: usize) -> StructuredMatrix {
        assemble(&ProblemSpec::new(family, n)).unwrap().matrix
    }

    fn rhs(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn single_subdomain_is_an_exact_solve() {
        let a = matrix(Family::ToeplitzAbsTheta, 30);
        let p = make_partition(30, 1, 0).unwrap();
        let r = rhs(30);
        for kind in Kind::ALL {
            let pre = setup(&a, &p, kind, None).unwrap();
            let z = pre.apply_inverse(&r).unwrap();
            let back = a.matvec(&z).unwrap();
            assert!(max_diff(&back, &r) < 1e-10, "{kind}");
            let t = pre.apply_iteration(&r).unwrap();
            assert!(t.iter().all(|v| v.abs() < 1e-10), "{kind}");
        }
    }

    #[test]
    fn zero_overlap_coincidences() {
        let a = matrix(Family::Fd1d, 40);
        let p = make_partition(40, 3, 0).unwrap();
        let r = rhs(40);
        let z = |k| setup(&a, &p, k, None).unwrap().apply_inverse(&r).unwrap();
        assert!(max_diff(&z(Kind::Bas), &z(Kind::Bj)) <= 1e-12);
        assert!(max_diff(&z(Kind::Bms), &z(Kind::Bgs)) <= 1e-12);
        let t_bas = setup(&a, &p, Kind::Bas, None).unwrap().apply_iteration(&r).unwrap();
        let t_bj = setup(&a, &p, Kind::Bj, None).unwrap().apply_iteration(&r).unwrap();
        assert!(max_diff(&t_bas, &t_bj) <= 1e-12);
    }

    #[test]
    fn setup_reports_local_dimensions() {
        let a = matrix(Family::Fd1d, 40);
        let pre = setup(&a, &make_partition(40, 2, 0).unwrap(), Kind::Bj, None).unwrap();
        assert_eq!(pre.local_dims(), vec![20, 20]);
        let a = matrix(Family::ToeplitzAbsTheta, 320);
        let pre = setup(&a, &make_partition(320, 2, 30).unwrap(), Kind::Bas, None).unwrap();
        assert_eq!(pre.local_dims(), vec![190, 190]);
    }

    #[test]
    fn kind_constraints() {
        let a = matrix(Family::Fd1d, 20);
        let p = make_partition(20, 2, 2).unwrap();
        assert!(matches!(setup(&a, &p, Kind::Bj, None), Err(SchwarzError::OverlapNotAllowed { .. })));
        let p0 = make_partition(20, 2, 0).unwrap();
        assert!(matches!(
            setup(&a, &p0, Kind::Bgs, Some(WeightScheme::Restricted)),
            Err(SchwarzError::SchemeNotAllowed { .. })
        ));
        let p_bad = make_partition(21, 2, 0).unwrap();
        assert!(matches!(setup(&a, &p_bad, Kind::Bas, None), Err(SchwarzError::DimensionMismatch { .. })));
        assert_eq!("BRAS".parse::<Kind>().unwrap(), Kind::Bras);
        assert!("ras".parse::<Kind>().is_err());
    }

    #[test]
    fn restricted_kinds_use_restricted_scheme() {
        let a = matrix(Family::Fd1d, 20);
        let p = make_partition(20, 2, 2).unwrap();
        assert_eq!(setup(&a, &p, Kind::Bras, None).unwrap().scheme(), WeightScheme::Restricted);
        assert_eq!(setup(&a, &p, Kind::Bas, Some(WeightScheme::Average)).unwrap().scheme(), WeightScheme::Average);
    }

    #[test]
    fn restricted_multiplicative_two_code_paths_agree() {
        let a = matrix(Family::Fd1d, 60);
        let p = make_partition(60, 3, 5).unwrap();
        let v = rhs(60);
        for kind in [Kind::Brms, Kind::Bms, Kind::Bgs] {
            let p = if kind == Kind::Bgs { make_partition(60, 3, 0).unwrap() } else { p.clone() };
            let pre = setup(&a, &p, kind, None).unwrap();
            let d = max_diff(&pre.apply_iteration(&v).unwrap(), &pre.apply_iteration_explicit(&v).unwrap());
            assert!(d <= 1e-12, "{kind}: {d}");
        }
    }

    #[test]
    fn block_jacobi_dense_image_is_block_diagonal() {
        let a = matrix(Family::Fd1d, 12);
        let pre = setup(&a, &make_partition(12, 2, 0).unwrap(), Kind::Bj, None).unwrap();
        let img = pre.dense_inverse_image().unwrap();
        for i in 0..6 {
            for j in 6..12 {
                assert_eq!(img[(i, j)], 0.0);
                assert_eq!(img[(j, i)], 0.0);
            }
        }
        // Inverse of the 6x6 (-1, 2, -1) block: (min(i,j)+1)(6-max(i,j))/7.
        for i in 0..6 {
            for j in 0..6 {
                let want = ((i.min(j) + 1) * (6 - i.max(j))) as f64 / 7.0;
                assert!((img[(i, j)] - want).abs() < 1e-13);
                assert!((img[(i + 6, j + 6)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn additive_overlap_image_is_symmetric() {
        let a = matrix(Family::Fd1d, 40);
        let pre = setup(&a, &make_partition(40, 2, 10).unwrap(), Kind::Bas, None).unwrap();
        let img = pre.dense_inverse_image().unwrap();
        assert!(img.max_asymmetry() <= 1e-10);
    }

    #[test]
    fn dense_guard() {
        let a = matrix(Family::Fd1d, DENSE_GUARD + 1);
        let pre = setup(&a, &make_partition(DENSE_GUARD + 1, 2, 0).unwrap(), Kind::Bj, None).unwrap();
        assert!(matches!(pre.dense_inverse_image(), Err(SchwarzError::TooLarge { .. })));
    }

    #[test]
    fn reverse_sweep_differs_but_solves_single_domain() {
        let a = matrix(Family::Fd1d, 30);
        let p = make_partition(30, 3, 2).unwrap();
        let r = rhs(30);
        let fwd = setup(&a, &p, Kind::Bms, None).unwrap().apply_inverse(&r).unwrap();
        let rev = setup(&a, &p, Kind::Bms, None)
            .unwrap()
            .with_order(SweepOrder::Reverse)
            .apply_inverse(&r)
            .unwrap();
        assert!(max_diff(&fwd, &rev) > 1e-8);
    }
}

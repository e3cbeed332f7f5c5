//! Discretization matrices of the model problems, each paired with its
//! reference symbol: the full Toeplitz matrix of |theta|, 1D finite
//! differences, 1D linear finite elements, 1D C0 B-splines and 2D
//! tensor-product B-splines with a variable coefficient.

use crate::matrices::{MatrixError, StructuredMatrix, Symmetry};
use crate::symbols::{Symbol, SymbolError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("invalid degree p = {p} for {family}")]
    InvalidDegree { family: Family, p: usize },
    #[error("coefficient is not positive at x = {x:?} (value {value})")]
    NonPositiveCoefficient { x: Vec<f64>, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ToeplitzAbsTheta,
    Fd1d,
    Fem1d,
    Spline1dC0,
    Iga2d,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::ToeplitzAbsTheta,
        Family::Fd1d,
        Family::Fem1d,
        Family::Spline1dC0,
        Family::Iga2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ToeplitzAbsTheta => "toeplitz-abs-theta",
            Family::Fd1d => "fd1d",
            Family::Fem1d => "fem1d",
            Family::Spline1dC0 => "spline1d-c0",
            Family::Iga2d => "iga2d",
        }
    }

    /// Spatial dimension of the coefficient.
    pub fn spatial_dim(self) -> usize {
        if self == Family::Iga2d {
            2
        } else {
            1
        }
    }

    /// Matrix dimension for mesh parameter `n` and degree `p`.
    pub fn dim(self, n: usize, p: usize) -> usize {
        match self {
            Family::ToeplitzAbsTheta | Family::Fd1d | Family::Fem1d => n,
            Family::Spline1dC0 => (p * n).saturating_sub(1),
            Family::Iga2d => (n + p).saturating_sub(2).pow(2),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = AssemblyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| AssemblyError::InvalidArgument(format!("unknown family '{s}'")))
    }
}

/// What to assemble.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub family: Family,
    /// Mesh parameter: matrix order for the Toeplitz/FD/FEM families,
    /// element count (per direction) for the spline families.
    pub n: usize,
    /// x-only diffusion coefficient; ignored by the Toeplitz family.
    pub coefficient: Symbol,
    /// Spline degree; ignored by the other families.
    pub degree: usize,
}

impl ProblemSpec {
    /// Spec with coefficient 1 and degree 2.
    pub fn new(family: Family, n: usize) -> Self {
        Self {
            family,
            n,
            coefficient: Symbol::constant(1.0, family.spatial_dim()),
            degree: 2,
        }
    }

    pub fn with_coefficient(mut self, a: Symbol) -> Self {
        self.coefficient = a;
        self
    }

    pub fn with_degree(mut self, p: usize) -> Self {
        self.degree = p;
        self
    }

    pub fn dim(&self) -> usize {
        self.family.dim(self.n, self.degree)
    }
}

/// An assembled matrix with its reference symbol.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub matrix: StructuredMatrix,
    /// `None` for the 2D family, whose symbol is not modelled.
    pub symbol: Option<Symbol>,
    pub scale_note: String,
}

pub fn assemble(spec: &ProblemSpec) -> Result<Assembly, AssemblyError> {
    let n = spec.n;
    if n == 0 {
        return Err(AssemblyError::InvalidArgument("n must be positive".into()));
    }
    let a = &spec.coefficient;
    if spec.family != Family::ToeplitzAbsTheta
        && (a.depends_on_theta() || a.size() != 1 || a.spatial_dim() != spec.family.spatial_dim())
    {
        return Err(AssemblyError::InvalidArgument(format!(
            "coefficient '{}' must be a scalar x-only function of {} variable(s)",
            a.label(),
            spec.family.spatial_dim()
        )));
    }
    match spec.family {
        Family::ToeplitzAbsTheta => {
            let matrix = StructuredMatrix::from_band_fn(n, n - 1, n - 1, Symmetry::Hermitian, |i, j| {
                abs_theta_coefficient(i as i64 - j as i64)
            })?;
            Ok(Assembly {
                matrix,
                symbol: Some(Symbol::abs_theta()),
                scale_note: "full Toeplitz matrix of |theta|, exact coefficients, unscaled".into(),
            })
        }
        Family::Fd1d => {
            let h = 1.0 / (n as f64 + 1.0);
            let mut mid = Vec::with_capacity(n + 1);
            for j in 0..=n {
                // a at x_j + h/2 for j = 0..n, i.e. the n+1 cell midpoints
                let x = (j as f64 + 0.5) * h;
                mid.push(positive(a, &[x])?);
            }
            let matrix = StructuredMatrix::from_band_fn(n, 1, 1, Symmetry::Hermitian, |i, j| {
                if i == j {
                    mid[i] + mid[i + 1]
                } else {
                    -mid[i.max(j)]
                }
            })?;
            Ok(Assembly {
                matrix,
                symbol: Some(Symbol::weighted_laplacian(a)),
                scale_note: "unscaled (h^2 absorbed in the right-hand side)".into(),
            })
        }
        Family::Fem1d => {
            let basis = BSplineBasis::open_uniform(n + 1, 1, 1);
            let (stiff, _) = assemble_1d(&basis, Some(a), 3)?;
            let scale = 1.0 / (n as f64 + 1.0);
            let matrix = reduce_1d(&basis, stiff, scale)?;
            Ok(Assembly {
                matrix,
                symbol: Some(Symbol::weighted_laplacian(a)),
                scale_note: "scaled by 1/(n+1)".into(),
            })
        }
        Family::Spline1dC0 => {
            let p = spec.degree;
            if !(p == 2 || p == 3) {
                return Err(AssemblyError::InvalidDegree {
                    family: spec.family,
                    p,
                });
            }
            let basis = BSplineBasis::open_uniform(n, p, p);
            let (stiff, _) = assemble_1d(&basis, Some(a), p + 1)?;
            let matrix = reduce_1d(&basis, stiff, 1.0 / n as f64)?;
            Ok(Assembly {
                matrix,
                symbol: Some(Symbol::spline_c0(p)?.times_coefficient(a)),
                scale_note: "scaled by 1/n".into(),
            })
        }
        Family::Iga2d => {
            let p = spec.degree;
            if p < 2 {
                return Err(AssemblyError::InvalidDegree {
                    family: spec.family,
                    p,
                });
            }
            Ok(Assembly {
                matrix: assemble_iga2d(n, p, a)?,
                symbol: None,
                scale_note: "unscaled".into(),
            })
        }
    }
}

/// Fourier coefficient k of |theta|: pi/2 at k = 0, -2/(pi k^2) for odd k,
/// zero otherwise.
pub fn abs_theta_coefficient(k: i64) -> f64 {
    if k == 0 {
        PI / 2.0
    } else if k % 2 != 0 {
        -2.0 / (PI * (k * k) as f64)
    } else {
        0.0
    }
}

fn positive(a: &Symbol, x: &[f64]) -> Result<f64, AssemblyError> {
    let v = a.eval_unchecked(x, &vec![0.0; x.len()])[(0, 0)].re;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(AssemblyError::NonPositiveCoefficient { x: x.to_vec(), value: v })
    }
}

/// Gauss-Legendre nodes and weights on [a, b], 1 <= npts <= 10.
pub fn gauss_legendre(npts: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>), AssemblyError> {
    if !(1..=10).contains(&npts) {
        return Err(AssemblyError::InvalidArgument(format!(
            "Gauss-Legendre supports 1..=10 points (got {npts})"
        )));
    }
    let n = npts;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton on P_n from the Chebyshev-like initial guess.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p_n, p_prev) = legendre(n, z);
            dp = n as f64 * (z * p_n - p_prev) / (z * z - 1.0);
            let dz = p_n / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (p_n, p_prev) = legendre(n, z);
                dp = n as f64 * (z * p_n - p_prev) / (z * z - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok((
        nodes.iter().map(|t| mid + half * t).collect(),
        weights.iter().map(|w| half * w).collect(),
    ))
}

/// (P_n(z), P_{n-1}(z)) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, 0.0);
    for k in 0..n {
        let p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
    }
    (p0, p1)
}

/// B-spline basis on an open knot vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    degree: usize,
    knots: Vec<f64>,
}

impl BSplineBasis {
    /// Uniform open knot vector on [0,1] with `elements` spans whose interior
    /// knots are repeated `repeat` times (1 gives C^{p-1}, p gives C0).
    pub fn open_uniform(elements: usize, degree: usize, repeat: usize) -> Self {
        let mut knots = vec![0.0; degree + 1];
        for i in 1..elements {
            let u = i as f64 / elements as f64;
            knots.extend(std::iter::repeat_n(u, repeat));
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self { degree, knots }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions.
    pub fn count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Knot spans of positive length as (span index, left, right).
    pub fn elements(&self) -> Vec<(usize, f64, f64)> {
        (0..self.knots.len() - 1)
            .filter(|&k| self.knots[k] < self.knots[k + 1])
            .map(|k| (k, self.knots[k], self.knots[k + 1]))
            .collect()
    }

    /// Values of the degree-`deg` functions span-deg..=span at x.
    fn values(&self, span: usize, x: f64, deg: usize) -> Vec<f64> {
        let u = &self.knots;
        let mut n = vec![0.0; deg + 1];
        let mut left = vec![0.0; deg + 1];
        let mut right = vec![0.0; deg + 1];
        n[0] = 1.0;
        for j in 1..=deg {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Values and first derivatives of the functions span-p..=span at x,
    /// by the Cox-de Boor recursion.
    pub fn eval(&self, span: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
        let p = self.degree;
        let u = &self.knots;
        let vals = self.values(span, x, p);
        let mut ders = vec![0.0; p + 1];
        if p > 0 {
            let low = self.values(span, x, p - 1);
            for (r, d) in ders.iter_mut().enumerate() {
                let i = span + r - p;
                let mut acc = 0.0;
                if r >= 1 {
                    let den = u[i + p] - u[i];
                    if den > 0.0 {
                        acc += low[r - 1] / den;
                    }
                }
                if r < p {
                    let den = u[i + p + 1] - u[i + 1];
                    if den > 0.0 {
                        acc -= low[r] / den;
                    }
                }
                *d = p as f64 * acc;
            }
        }
        (vals, ders)
    }
}

type Triplets = Vec<(usize, usize, f64)>;

/// Element loop for int a B_i' B_j' and int B_i B_j over the full basis.
/// With no coefficient, a = 1.
fn assemble_1d(
    basis: &BSplineBasis,
    a: Option<&Symbol>,
    quad: usize,
) -> Result<(Triplets, Triplets), AssemblyError> {
    let p = basis.degree();
    let mut stiff = Vec::new();
    let mut mass = Vec::new();
    for (span, lo, hi) in basis.elements() {
        let (xs, ws) = gauss_legendre(quad, lo, hi)?;
        let first = span - p;
        for (x, w) in xs.iter().zip(&ws) {
            let ax = match a {
                Some(a) => positive(a, &[*x])?,
                None => 1.0,
            };
            let (v, d) = basis.eval(span, *x);
            for r in 0..=p {
                for c in 0..=p {
                    stiff.push((first + r, first + c, w * ax * d[r] * d[c]));
                    mass.push((first + r, first + c, w * v[r] * v[c]));
                }
            }
        }
    }
    Ok((stiff, mass))
}

/// Drops the first and last basis functions (homogeneous Dirichlet) and
/// scales.
fn reduce_1d(basis: &BSplineBasis, trip: Triplets, scale: f64) -> Result<StructuredMatrix, AssemblyError> {
    let count = basis.count();
    let kept = trip
        .into_iter()
        .filter(|(i, j, _)| *i > 0 && *j > 0 && *i < count - 1 && *j < count - 1)
        .map(|(i, j, v)| (i - 1, j - 1, scale * v));
    Ok(StructuredMatrix::from_triplets(count - 2, kept, Symmetry::Hermitian)?)
}

/// Univariate stiffness and mass matrices of the C^{p-1} basis with `n`
/// elements, boundary functions removed, coefficient 1, unscaled.
pub fn univariate_matrices(n: usize, p: usize) -> Result<(StructuredMatrix, StructuredMatrix), AssemblyError> {
    if p < 1 || n == 0 {
        return Err(AssemblyError::InvalidArgument("need p >= 1 and n >= 1".into()));
    }
    let basis = BSplineBasis::open_uniform(n, p, 1);
    let (stiff, mass) = assemble_1d(&basis, None, p + 1)?;
    Ok((reduce_1d(&basis, stiff, 1.0)?, reduce_1d(&basis, mass, 1.0)?))
}

/// Weighted stiffness int a grad(B_i) . grad(B_j) for tensor-product
/// C^{p-1} splines, Dirichlet functions removed, x1 running fastest.
fn assemble_iga2d(n: usize, p: usize, a: &Symbol) -> Result<StructuredMatrix, AssemblyError> {
    let basis = BSplineBasis::open_uniform(n, p, 1);
    let count = basis.count();
    let m = count - 2;
    let elements = basis.elements();
    // Per element: quadrature nodes, weights, values and derivatives.
    let mut tab = Vec::with_capacity(elements.len());
    for &(span, lo, hi) in &elements {
        let (xs, ws) = gauss_legendre(p + 1, lo, hi)?;
        let evals: Vec<_> = xs.iter().map(|x| basis.eval(span, *x)).collect();
        tab.push((span, xs, ws, evals));
    }
    let local = |g: usize| -> Option<usize> { (g > 0 && g < count - 1).then(|| g - 1) };
    let mut trip = Vec::new();
    let q = p + 1;
    let nloc = q * q;
    let mut ke = vec![0.0; nloc * nloc];
    for (s2, xs2, ws2, e2) in &tab {
        for (s1, xs1, ws1, e1) in &tab {
            ke.iter_mut().for_each(|v| *v = 0.0);
            for (k2, x2) in xs2.iter().enumerate() {
                let (v2, d2) = &e2[k2];
                for (k1, x1) in xs1.iter().enumerate() {
                    let (v1, d1) = &e1[k1];
                    let w = ws1[k1] * ws2[k2] * positive(a, &[*x1, *x2])?;
                    for b2 in 0..q {
                        for b1 in 0..q {
                            let gx = d1[b1] * v2[b2];
                            let gy = v1[b1] * d2[b2];
                            let row = b1 + q * b2;
                            for c2 in 0..q {
                                for c1 in 0..q {
                                    let hx = d1[c1] * v2[c2];
                                    let hy = v1[c1] * d2[c2];
                                    ke[row * nloc + c1 + q * c2] += w * (gx * hx + gy * hy);
                                }
                            }
                        }
                    }
                }
            }
            let (f1, f2) = (s1 - p, s2 - p);
            for b2 in 0..q {
                for b1 in 0..q {
                    let (Some(r1), Some(r2)) = (local(f1 + b1), local(f2 + b2)) else {
                        continue;
                    };
                    let row = r1 + m * r2;
                    for c2 in 0..q {
                        for c1 in 0..q {
                            let (Some(t1), Some(t2)) = (local(f1 + c1), local(f2 + c2)) else {
                                continue;
                            };
                            trip.push((row, t1 + m * t2, ke[(b1 + q * b2) * nloc + c1 + q * c2]));
                        }
                    }
                }
            }
        }
    }
    Ok(StructuredMatrix::from_triplets(m * m, trip, Symmetry::Hermitian)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;

    fn tridiag(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        })
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert_eq!("spline1d_c0".parse::<Family>().unwrap(), Family::Spline1dC0);
        assert!("fd3d".parse::<Family>().is_err());
    }

    #[test]
    fn fd_constant_coefficient_is_second_difference() {
        let asm = assemble(&ProblemSpec::new(Family::Fd1d, 5)).unwrap();
        assert_eq!(asm.matrix.to_dense(), tridiag(5));
        assert!(asm.matrix.is_hermitian());
    }

    #[test]
    fn fd_variable_coefficient_by_hand() {
        let spec = ProblemSpec::new(Family::Fd1d, 2).with_coefficient(Symbol::one_plus_x_squared());
        let m = assemble(&spec).unwrap().matrix;
        assert!((m.get(0, 0) - 82.0 / 36.0).abs() < 1e-14);
        assert!((m.get(1, 1) - 106.0 / 36.0).abs() < 1e-14);
        assert!((m.get(0, 1) + 45.0 / 36.0).abs() < 1e-14);
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn fem_constant_coefficient_matches_fd() {
        for n in [1, 4, 17] {
            let fem = assemble(&ProblemSpec::new(Family::Fem1d, n)).unwrap().matrix;
            let fd = assemble(&ProblemSpec::new(Family::Fd1d, n)).unwrap().matrix;
            assert!(fem.to_dense().max_abs_diff(&fd.to_dense()) < 1e-13);
        }
    }

    #[test]
    fn spline_dimensions_and_constant_null_rows() {
        let m = assemble(&ProblemSpec::new(Family::Spline1dC0, 10).with_degree(2)).unwrap().matrix;
        assert_eq!(m.dim(), 19);
        let m = assemble(&ProblemSpec::new(Family::Spline1dC0, 10).with_degree(3)).unwrap().matrix;
        assert_eq!(m.dim(), 29);
        let ones = vec![1.0; 29];
        let r = m.matvec(&ones).unwrap();
        // Rows not touching the removed boundary functions annihilate constants.
        for v in &r[3..26] {
            assert!(v.abs() < 1e-13, "{v}");
        }
    }

    #[test]
    fn spline_degree_is_validated() {
        let r = assemble(&ProblemSpec::new(Family::Spline1dC0, 4).with_degree(4));
        assert!(matches!(r, Err(AssemblyError::InvalidDegree { p: 4, .. })));
        let r = assemble(&ProblemSpec::new(Family::Iga2d, 4).with_degree(1));
        assert!(matches!(r, Err(AssemblyError::InvalidDegree { p: 1, .. })));
    }

    #[test]
    fn nonpositive_coefficient_is_rejected() {
        let a = Symbol::coefficient("x-0.5", 1, |x| x[0] - 0.5);
        let r = assemble(&ProblemSpec::new(Family::Fd1d, 8).with_coefficient(a.clone()));
        assert!(matches!(r, Err(AssemblyError::NonPositiveCoefficient { .. })));
        let r = assemble(&ProblemSpec::new(Family::Fem1d, 8).with_coefficient(a));
        assert!(matches!(r, Err(AssemblyError::NonPositiveCoefficient { .. })));
    }

    #[test]
    fn gauss_legendre_classical_rules() {
        let (x, w) = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!((x[0], w[0]), (0.0, 2.0));
        let (x, w) = gauss_legendre(2, -1.0, 1.0).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3, 0.0, 1.0).unwrap();
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((i - 0.2).abs() <= 1e-15);
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(11, 0.0, 1.0).is_err());
    }

    #[test]
    fn gauss_legendre_exactness_up_to_ten_points() {
        for npts in 1..=10 {
            let (x, w) = gauss_legendre(npts, -1.0, 1.0).unwrap();
            for deg in 0..2 * npts {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-14, "npts {npts} deg {deg}: {got}");
            }
        }
    }

    #[test]
    fn basis_is_partition_of_unity() {
        for (p, rep) in [(2, 1), (2, 2), (3, 3), (4, 1)] {
            let b = BSplineBasis::open_uniform(5, p, rep);
            for (span, lo, hi) in b.elements() {
                for t in [0.0, 0.3, 0.77] {
                    let (v, d) = b.eval(span, lo + t * (hi - lo));
                    assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                    assert!(d.iter().sum::<f64>().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn abs_theta_matrix_entries() {
        let m = assemble(&ProblemSpec::new(Family::ToeplitzAbsTheta, 3)).unwrap().matrix;
        assert!((m.get(0, 0) - PI / 2.0).abs() < 1e-15);
        assert!((m.get(0, 1) + 2.0 / PI).abs() < 1e-15);
        assert_eq!(m.get(0, 2), 0.0);
    }
}

//! Scalar and matrix-valued symbols on [0,1]^d x [-pi,pi]^d, their Fourier
//! coefficients, and eigenvalue branches sampled on uniform grids.

use crate::dense::{hermitian_eigenvalues, CMatrix};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;
use thiserror::Error;

/// Nodes used by [`fourier_coeffs`] when no count is given.
pub const DEFAULT_QUAD_POINTS: usize = 8192;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("point outside the symbol domain: x = {x:?}, theta = {theta:?}")]
    Domain { x: Vec<f64>, theta: Vec<f64> },
    #[error("symbol '{label}' is not hermitian at x = {x:?}, theta = {theta:?} (defect {defect:e})")]
    NotHermitian {
        label: String,
        x: Vec<f64>,
        theta: Vec<f64>,
        defect: f64,
    },
    #[error("symbol '{label}' depends on x; a theta-only symbol is required")]
    DependsOnX { label: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

type EvalFn = dyn Fn(&[f64], &[f64]) -> CMatrix + Send + Sync;

/// A matrix-valued function kappa(x, theta) of size s x s, stored as an
/// evaluation callback plus metadata.
#[derive(Clone)]
pub struct Symbol {
    label: String,
    size: usize,
    spatial_dim: usize,
    hermitian: bool,
    depends_on_x: bool,
    depends_on_theta: bool,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("label", &self.label)
            .field("size", &self.size)
            .field("spatial_dim", &self.spatial_dim)
            .field("hermitian", &self.hermitian)
            .finish()
    }
}

impl Symbol {
    /// General constructor. `depends_on_x`/`depends_on_theta` only steer
    /// sampling and argument checks; the callback sees every argument.
    pub fn new(
        label: impl Into<String>,
        size: usize,
        spatial_dim: usize,
        hermitian: bool,
        depends_on_x: bool,
        depends_on_theta: bool,
        eval: impl Fn(&[f64], &[f64]) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        assert!(size >= 1, "symbol size must be positive");
        assert!(matches!(spatial_dim, 1 | 2), "spatial dimension must be 1 or 2");
        Self {
            label: label.into(),
            size,
            spatial_dim,
            hermitian,
            depends_on_x,
            depends_on_theta,
            eval: Arc::new(eval),
        }
    }

    /// Real scalar symbol f(x, theta).
    pub fn scalar(
        label: impl Into<String>,
        spatial_dim: usize,
        depends_on_x: bool,
        depends_on_theta: bool,
        f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, 1, spatial_dim, true, depends_on_x, depends_on_theta, move |x, t| {
            CMatrix::real_scalar(f(x, t))
        })
    }

    /// Real x-only scalar function, the form taken by diffusion coefficients.
    pub fn coefficient(
        label: impl Into<String>,
        spatial_dim: usize,
        a: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::scalar(label, spatial_dim, true, false, move |x, _| a(x))
    }

    pub fn constant(c: f64, spatial_dim: usize) -> Self {
        let label = if c == 1.0 { "1".to_string() } else { format!("{c}") };
        Self::scalar(label, spatial_dim, false, false, move |_, _| c)
    }

    /// c I_size, constant in x and theta.
    pub fn scaled_identity(c: f64, size: usize, spatial_dim: usize) -> Self {
        Self::new(format!("{c} I_{size}"), size, spatial_dim, true, false, false, move |_, _| {
            let mut m = CMatrix::zeros(size);
            for i in 0..size {
                m[(i, i)] = Complex64::new(c, 0.0);
            }
            m
        })
    }

    /// a(x) = 1 + x^2.
    pub fn one_plus_x_squared() -> Self {
        Self::coefficient("1+x^2", 1, |x| 1.0 + x[0] * x[0])
    }

    /// a(x1, x2) = 1 + x1 + x2.
    pub fn one_plus_x1_plus_x2() -> Self {
        Self::coefficient("1+x1+x2", 2, |x| 1.0 + x[0] + x[1])
    }

    /// Characteristic function of [lo, hi] in x.
    pub fn characteristic(lo: f64, hi: f64) -> Self {
        Self::coefficient(format!("chi[{lo},{hi}]"), 1, move |x| {
            if x[0] >= lo && x[0] <= hi {
                1.0
            } else {
                0.0
            }
        })
    }

    /// 2 - 2 cos(theta).
    pub fn laplacian() -> Self {
        Self::scalar("2-2cos(theta)", 1, false, true, |_, t| 2.0 - 2.0 * t[0].cos())
    }

    /// |theta|.
    pub fn abs_theta() -> Self {
        Self::scalar("|theta|", 1, false, true, |_, t| t[0].abs())
    }

    /// a(x) (2 - 2 cos(theta)) for a univariate coefficient a.
    pub fn weighted_laplacian(a: &Symbol) -> Self {
        Self::laplacian().times_coefficient(a)
    }

    /// Product a(x) kappa(x, theta) with a scalar x-only coefficient a.
    /// A constant coefficient 1 returns `self` unchanged.
    pub fn times_coefficient(&self, a: &Symbol) -> Self {
        if !a.depends_on_x && a.eval_unchecked(&vec![0.5; a.spatial_dim], &vec![0.0; a.spatial_dim])[(0, 0)] == Complex64::new(1.0, 0.0) {
            return self.clone();
        }
        let (a, k) = (a.clone(), self.clone());
        let label = format!("({})({})", a.label, k.label);
        Self::new(label, k.size, k.spatial_dim, k.hermitian, true, k.depends_on_theta, move |x, t| {
            k.eval_unchecked(x, t).scale(a.eval_unchecked(x, t)[(0, 0)])
        })
    }

    /// Symbol of the scaled stiffness matrix of C0 B-splines of degree
    /// `p` in {2, 3}, with unknowns ordered interior dofs then the right
    /// vertex of each element.
    pub fn spline_c0(p: usize) -> Result<Self, SymbolError> {
        let e = |t: f64, k: f64| Complex64::from_polar(1.0, k * t);
        match p {
            2 => Ok(Self::new("C0 spline p=2", 2, 1, true, false, true, move |_, th| {
                let t = th[0];
                let off = (Complex64::new(-2.0, 0.0) - 2.0 * e(t, 1.0)) / 3.0;
                CMatrix::from_rows(&[
                    vec![Complex64::new(4.0 / 3.0, 0.0), off],
                    vec![off.conj(), Complex64::new((8.0 - 4.0 * t.cos()) / 3.0, 0.0)],
                ])
            })),
            3 => Ok(Self::new("C0 spline p=3", 3, 1, true, false, true, move |_, th| {
                let t = th[0];
                let r = |v: f64| Complex64::new(v / 10.0, 0.0);
                let a02 = (Complex64::new(-6.0, 0.0) - 9.0 * e(t, 1.0)) / 10.0;
                let a12 = (Complex64::new(-9.0, 0.0) - 6.0 * e(t, 1.0)) / 10.0;
                CMatrix::from_rows(&[
                    vec![r(12.0), r(3.0), a02],
                    vec![r(3.0), r(12.0), a12],
                    vec![a02.conj(), a12.conj(), r(36.0 - 6.0 * t.cos())],
                ])
            })),
            _ => Err(SymbolError::InvalidArgument(format!(
                "C0 spline symbols exist for p = 2, 3 only (got {p})"
            ))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn depends_on_x(&self) -> bool {
        self.depends_on_x
    }

    pub fn depends_on_theta(&self) -> bool {
        self.depends_on_theta
    }

    /// Evaluates at (x, theta) after checking both lie in the domain.
    pub fn eval(&self, x: &[f64], theta: &[f64]) -> Result<CMatrix, SymbolError> {
        let d = self.spatial_dim;
        let ok = x.len() == d
            && theta.len() == d
            && x.iter().all(|v| (0.0..=1.0).contains(v))
            && theta.iter().all(|v| (-PI..=PI).contains(v));
        if !ok {
            return Err(SymbolError::Domain {
                x: x.to_vec(),
                theta: theta.to_vec(),
            });
        }
        Ok(self.eval_unchecked(x, theta))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], theta: &[f64]) -> CMatrix {
        (self.eval)(x, theta)
    }
}

/// Free-function form of [`Symbol::eval`].
pub fn eval_symbol(sym: &Symbol, x: &[f64], theta: &[f64]) -> Result<CMatrix, SymbolError> {
    sym.eval(x, theta)
}

/// A sampling point of the symbol grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GridPoint {
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Eigenvalue branches of a Hermitian symbol over a uniform grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SymbolSamples {
    /// `branch_values[k]` holds the (k+1)-th smallest eigenvalue at every
    /// grid point, sorted ascending.
    pub branch_values: Vec<Vec<f64>>,
    /// Grid in evaluation order (before per-branch sorting).
    pub grid: Vec<GridPoint>,
}

impl SymbolSamples {
    /// Writes `branch,index,value` rows (0-based branch and index).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "branch,index,value")?;
        for (b, values) in self.branch_values.iter().enumerate() {
            for (i, v) in values.iter().enumerate() {
                writeln!(w, "{b},{i},{v:e}")?;
            }
        }
        Ok(())
    }
}

fn uniform_theta(n_theta: usize) -> Vec<f64> {
    (1..=n_theta).map(|j| (j as f64 * PI / n_theta as f64).min(PI)).collect()
}

fn uniform_x(n_x: usize) -> Vec<f64> {
    (1..=n_x).map(|i| i as f64 / n_x as f64).collect()
}

fn tensor(axis: &[f64], d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => axis.iter().map(|v| vec![*v]).collect(),
        _ => axis
            .iter()
            .flat_map(|b| axis.iter().map(move |a| vec![*a, *b]))
            .collect(),
    }
}

/// Samples the eigenvalue functions of `sym` on theta_j = j pi / n_theta,
/// j = 1..n_theta (and x_i = i / n_x when the symbol depends on x).
pub fn symbol_eig_branches(sym: &Symbol, n_x: usize, n_theta: usize) -> Result<SymbolSamples, SymbolError> {
    if n_theta == 0 || (sym.depends_on_x && n_x == 0) {
        return Err(SymbolError::InvalidArgument("grid counts must be positive".into()));
    }
    let d = sym.spatial_dim;
    let thetas = tensor(&uniform_theta(n_theta), d);
    let xs = if sym.depends_on_x {
        tensor(&uniform_x(n_x), d)
    } else {
        vec![vec![0.5; d]]
    };
    let s = sym.size;
    let mut branches = vec![Vec::with_capacity(xs.len() * thetas.len()); s];
    let mut grid = Vec::with_capacity(xs.len() * thetas.len());
    for x in &xs {
        for t in &thetas {
            let m = sym.eval(x, t)?;
            let defect = m.hermitian_defect();
            if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
                return Err(SymbolError::NotHermitian {
                    label: sym.label.clone(),
                    x: x.clone(),
                    theta: t.clone(),
                    defect,
                });
            }
            for (b, v) in hermitian_eigenvalues(&m).into_iter().enumerate() {
                branches[b].push(v);
            }
            grid.push(GridPoint {
                x: x.clone(),
                theta: t.clone(),
            });
        }
    }
    for b in &mut branches {
        b.sort_by(f64::total_cmp);
    }
    Ok(SymbolSamples {
        branch_values: branches,
        grid,
    })
}

/// Fourier coefficients f_{-k_max}..=f_{k_max} of a univariate theta-only
/// symbol by the composite trapezoid rule on `quad_points` periodic nodes.
/// For Hermitian symbols f_{-k} is set to f_k^H.
pub fn fourier_coeffs(f: &Symbol, k_max: usize, quad_points: usize) -> Result<Vec<CMatrix>, SymbolError> {
    if f.depends_on_x {
        return Err(SymbolError::DependsOnX {
            label: f.label.clone(),
        });
    }
    if f.spatial_dim != 1 {
        return Err(SymbolError::InvalidArgument(
            "Fourier coefficients are implemented for univariate symbols".into(),
        ));
    }
    if quad_points == 0 {
        return Err(SymbolError::InvalidArgument("quad_points must be positive".into()));
    }
    let s = f.size;
    let h = 2.0 * PI / quad_points as f64;
    let x = [0.5];
    let values: Vec<(f64, CMatrix)> = (0..quad_points)
        .map(|q| {
            let t = -PI + q as f64 * h;
            (t, f.eval_unchecked(&x, &[t]))
        })
        .collect();
    let coeff = |k: i64| {
        let mut acc = CMatrix::zeros(s);
        for (t, v) in &values {
            let w = Complex64::from_polar(1.0, -(k as f64) * t);
            acc = &acc + &v.scale(w);
        }
        acc.scale(Complex64::new(1.0 / quad_points as f64, 0.0))
    };
    let k_max = k_max as i64;
    let mut out: Vec<CMatrix> = (-k_max..=k_max).map(|_| CMatrix::zeros(s)).collect();
    for k in 0..=k_max {
        let fk = coeff(k);
        let idx = (k + k_max) as usize;
        if f.hermitian {
            let mirror = (k_max - k) as usize;
            out[mirror] = fk.conj_transpose();
            out[idx] = if k == 0 {
                // f_0 of a Hermitian symbol is Hermitian.
                let sym = &fk + &fk.conj_transpose();
                sym.scale(Complex64::new(0.5, 0.0))
            } else {
                fk
            };
        } else {
            out[idx] = fk;
            out[(k_max - k) as usize] = coeff(-k);
        }
    }
    Ok(out)
}

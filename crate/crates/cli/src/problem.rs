//! Problem construction and single solves shared by the subcommands and
//! the table runner.

use crate::error::CliError;
use glt_schwarz::assembly::{assemble, Assembly, Family, ProblemSpec};
use glt_schwarz::krylov::{cg, gmres, Preconditioner, SolveReport, SolverOptions};
use glt_schwarz::matrices::StructuredMatrix;
use glt_schwarz::partition::{make_partition, WeightScheme};
use glt_schwarz::schwarz::{setup, Kind, SchwarzPreconditioner};
use glt_schwarz::symbols::Symbol;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Coefficient names accepted by `--coeff`.
pub const COEFFICIENTS: [&str; 3] = ["one", "one-plus-x2", "one-plus-x1-plus-x2"];

pub fn parse_coefficient(name: &str, spatial_dim: usize) -> Result<Symbol, CliError> {
    match name {
        "one" | "1" => Ok(Symbol::constant(1.0, spatial_dim)),
        "one-plus-x2" => Ok(Symbol::one_plus_x_squared()),
        "one-plus-x1-plus-x2" => Ok(Symbol::one_plus_x1_plus_x2()),
        other => Err(CliError::Usage(format!(
            "unknown coefficient '{other}' (expected one of {})",
            COEFFICIENTS.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProblemArgs {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub coeff: String,
}

impl ProblemArgs {
    pub fn new(family: Family, n: usize) -> Self {
        ProblemArgs {
            family,
            n,
            p: 2,
            coeff: "one".into(),
        }
    }

    pub fn spec(&self) -> Result<ProblemSpec, CliError> {
        let a = parse_coefficient(&self.coeff, self.family.spatial_dim())?;
        Ok(ProblemSpec::new(self.family, self.n).with_degree(self.p).with_coefficient(a))
    }

    pub fn dim(&self) -> usize {
        self.family.dim(self.n, self.p)
    }

    pub fn assemble(&self) -> Result<Assembly, CliError> {
        Ok(assemble(&self.spec()?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cg,
    Gmres,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cg => "cg",
            Method::Gmres => "gmres",
        })
    }
}

impl FromStr for Method {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cg" | "pcg" => Ok(Method::Cg),
            "gmres" | "pgmres" => Ok(Method::Gmres),
            _ => Err(CliError::Usage(format!("unknown method '{s}'"))),
        }
    }
}

/// Preconditioner choice; `kind = None` means unpreconditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrecondArgs {
    pub kind: Option<Kind>,
    pub weights: Option<WeightScheme>,
    pub nu: usize,
    pub overlap: usize,
}

impl PrecondArgs {
    pub fn none() -> Self {
        PrecondArgs {
            kind: None,
            weights: None,
            nu: 1,
            overlap: 0,
        }
    }

    pub fn of(kind: Kind, nu: usize, overlap: usize) -> Self {
        PrecondArgs {
            kind: Some(kind),
            weights: None,
            nu,
            overlap,
        }
    }

    /// Builds the preconditioner, or `Ok(None)` when unpreconditioned.
    /// An inadmissible (nu, overlap) gives `CliError::NotAdmissible`.
    pub fn build<'a>(&self, a: &'a StructuredMatrix) -> Result<Option<SchwarzPreconditioner<'a>>, CliError> {
        let Some(kind) = self.kind else {
            return Ok(None);
        };
        let part = make_partition(a.dim(), self.nu, self.overlap)?;
        Ok(Some(setup(a, &part, kind, self.weights)?))
    }
}

/// Parses `--precond`, where `none` means no preconditioner.
pub fn parse_precond(s: &str) -> Result<Option<Kind>, CliError> {
    if s.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        s.parse::<Kind>().map(Some).map_err(|e| CliError::Usage(e.to_string()))
    }
}

pub fn solve(
    a: &StructuredMatrix,
    method: Method,
    precond: &PrecondArgs,
    opts: &SolverOptions,
) -> Result<SolveReport, CliError> {
    let pre = precond.build(a)?;
    let p = pre.as_ref().map(|p| p as &dyn Preconditioner);
    let b = vec![1.0; a.dim()];
    let report = match method {
        Method::Cg => cg(a, &b, p, opts)?,
        Method::Gmres => gmres(a, &b, p, opts)?,
    };
    Ok(report)
}

//! Runs a registered table and writes it in the published layout.

use crate::error::CliError;
use crate::problem::{solve, Method, PrecondArgs, ProblemArgs};
use crate::registry::{Layout, TableSpec};
use glt_schwarz::krylov::SolverOptions;
use glt_schwarz::matrices::StructuredMatrix;
use glt_schwarz::partition::is_admissible;
use glt_schwarz::spectra::{cluster_count, eigenvalues_dense};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Count(usize),
    Fraction(f64),
    Admissible(bool),
    Nac,
}

impl Cell {
    pub fn count(&self) -> Option<usize> {
        match self {
            Cell::Count(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_nac(&self) -> bool {
        matches!(self, Cell::Nac | Cell::Admissible(false))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Count(c) => write!(f, "{c}"),
            Cell::Fraction(x) => write!(f, "{x:.4}"),
            Cell::Admissible(b) => write!(f, "{b}"),
            Cell::Nac => f.write_str("nac"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    /// cg, pcg, gmres or pgmres; empty for clustering tables.
    pub method: String,
    /// nu for iteration tables, "nu/eps" for clustering tables.
    pub label: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableResult {
    pub id: String,
    pub layout: Layout,
    pub n: Vec<usize>,
    pub dims: Vec<usize>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub tol: f64,
    pub cap: Option<usize>,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    pub only_admissibility: bool,
    /// Restricts the run to these n (kept in registry order).
    pub n_subset: Option<Vec<usize>>,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            tol: 1e-6,
            cap: None,
            jobs: None,
            only_admissibility: false,
            n_subset: None,
        }
    }
}

/// One unit of work: the unpreconditioned pair (`nu = None`) or the
/// preconditioned pair for one nu, at one n.
struct Job {
    col: usize,
    nu: Option<usize>,
}

fn iteration_cells(
    spec: &TableSpec,
    a: &StructuredMatrix,
    nu: Option<usize>,
    opts: &TableOptions,
) -> Result<(Cell, Cell), CliError> {
    let precond = match nu {
        None => PrecondArgs::none(),
        Some(nu) => {
            if !is_admissible(a.dim(), nu, spec.overlap) {
                return Ok((Cell::Nac, Cell::Nac));
            }
            PrecondArgs::of(spec.kind, nu, spec.overlap)
        }
    };
    let mut solver = SolverOptions::default().with_tol(opts.tol);
    solver.cap = opts.cap;
    let cg = solve(a, Method::Cg, &precond, &solver)?;
    solver.restart = spec.gmres_restart;
    let gm = solve(a, Method::Gmres, &precond, &solver)?;
    Ok((Cell::Count(cg.iterations), Cell::Count(gm.iterations)))
}

fn cluster_cells(spec: &TableSpec, a: &StructuredMatrix, nu: usize) -> Result<Vec<Cell>, CliError> {
    if !is_admissible(a.dim(), nu, spec.overlap) {
        return Ok(vec![Cell::Nac; spec.eps.len()]);
    }
    let pre = PrecondArgs::of(spec.kind, nu, spec.overlap)
        .build(a)?
        .expect("kind is set");
    let eigs = eigenvalues_dense(&pre.dense_preconditioned()?)?;
    let report = cluster_count(&eigs, &spec.eps);
    Ok(match spec.layout {
        Layout::ClusterCount => report.counts.into_iter().map(Cell::Count).collect(),
        _ => report.fractions.into_iter().map(Cell::Fraction).collect(),
    })
}

pub fn run_table(spec: &TableSpec, opts: &TableOptions) -> Result<TableResult, CliError> {
    let n: Vec<usize> = match &opts.n_subset {
        Some(keep) => {
            if let Some(bad) = keep.iter().find(|k| !spec.n.contains(k)) {
                return Err(CliError::Usage(format!("n = {bad} is not a column of table '{}'", spec.id)));
            }
            spec.n.iter().copied().filter(|v| keep.contains(v)).collect()
        }
        None => spec.n.clone(),
    };
    let dims: Vec<usize> = n.iter().map(|&v| spec.dim(v)).collect();
    let result = |rows| TableResult {
        id: spec.id.clone(),
        layout: spec.layout,
        n: n.clone(),
        dims: dims.clone(),
        rows,
    };

    if opts.only_admissibility {
        return Ok(result(admissibility_rows(spec, &dims)));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| {
        let matrices = n
            .par_iter()
            .map(|&v| {
                ProblemArgs {
                    family: spec.family,
                    n: v,
                    p: spec.degree,
                    coeff: spec.coeff.clone(),
                }
                .assemble()
                .map(|asm| asm.matrix)
            })
            .collect::<Result<Vec<_>, _>>()?;
        match spec.layout {
            Layout::Iterations => {
                let mut jobs = Vec::new();
                for col in 0..n.len() {
                    jobs.push(Job { col, nu: None });
                    jobs.extend(spec.nu.iter().map(|&nu| Job { col, nu: Some(nu) }));
                }
                let cells = jobs
                    .par_iter()
                    .map(|j| iteration_cells(spec, &matrices[j.col], j.nu, opts))
                    .collect::<Result<Vec<_>, _>>()?;
                let lookup = |col: usize, nu: Option<usize>| {
                    let k = jobs.iter().position(|j| j.col == col && j.nu == nu).unwrap();
                    cells[k]
                };
                let mut rows = Vec::new();
                for (method, pre) in [("cg", false), ("pcg", true), ("gmres", false), ("pgmres", true)] {
                    let pick = |c: (Cell, Cell)| if method.contains("cg") { c.0 } else { c.1 };
                    for &nu in &spec.nu {
                        let key = pre.then_some(nu);
                        rows.push(TableRow {
                            method: method.into(),
                            label: if pre { nu.to_string() } else { "1".into() },
                            cells: (0..n.len()).map(|c| pick(lookup(c, key))).collect(),
                        });
                    }
                }
                Ok(result(rows))
            }
            Layout::ClusterCount | Layout::ClusterFraction => {
                let jobs: Vec<(usize, usize)> = spec
                    .nu
                    .iter()
                    .flat_map(|&nu| (0..n.len()).map(move |c| (nu, c)))
                    .collect();
                let cells = jobs
                    .par_iter()
                    .map(|&(nu, c)| cluster_cells(spec, &matrices[c], nu))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut rows = Vec::new();
                for (vi, &nu) in spec.nu.iter().enumerate() {
                    for (ei, eps) in spec.eps.iter().enumerate() {
                        rows.push(TableRow {
                            method: String::new(),
                            label: format!("{nu}/{eps}"),
                            cells: (0..n.len()).map(|c| cells[vi * n.len() + c][ei]).collect(),
                        });
                    }
                }
                Ok(result(rows))
            }
        }
    })
}

fn admissibility_rows(spec: &TableSpec, dims: &[usize]) -> Vec<TableRow> {
    let grid = |nu: usize| dims.iter().map(|&d| Cell::Admissible(is_admissible(d, nu, spec.overlap))).collect();
    match spec.layout {
        Layout::Iterations => {
            let mut rows = Vec::new();
            for (method, pre) in [("cg", false), ("pcg", true), ("gmres", false), ("pgmres", true)] {
                for &nu in &spec.nu {
                    rows.push(TableRow {
                        method: method.into(),
                        label: if pre { nu.to_string() } else { "1".into() },
                        cells: if pre { grid(nu) } else { vec![Cell::Admissible(true); dims.len()] },
                    });
                }
            }
            rows
        }
        _ => spec
            .nu
            .iter()
            .flat_map(|&nu| {
                spec.eps.iter().map(move |eps| TableRow {
                    method: String::new(),
                    label: format!("{nu}/{eps}"),
                    cells: grid(nu),
                })
            })
            .collect(),
    }
}

impl TableResult {
    /// CSV with a header row; `preamble` lines are written first as
    /// `# `-prefixed comments.
    pub fn write_csv<W: Write>(&self, w: W, preamble: &[String]) -> Result<(), csv::Error> {
        let mut w = w;
        for line in preamble {
            writeln!(w, "# {line}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        let ns = self.n.iter().map(|v| v.to_string());
        match self.layout {
            Layout::Iterations => {
                out.write_record(["method".to_string(), "nu".to_string()].into_iter().chain(ns))?;
                for r in &self.rows {
                    out.write_record([r.method.clone(), r.label.clone()].into_iter().chain(r.cells.iter().map(Cell::to_string)))?;
                }
            }
            _ => {
                out.write_record(std::iter::once("nu/eps".to_string()).chain(ns))?;
                for r in &self.rows {
                    out.write_record(std::iter::once(r.label.clone()).chain(r.cells.iter().map(Cell::to_string)))?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

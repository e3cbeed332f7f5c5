//! The table manifest: which problem, preconditioner and grid each table
//! runs, plus the published cells for comparison.

use crate::error::CliError;
use glt_schwarz::assembly::Family;
use glt_schwarz::schwarz::Kind;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// The manifest shipped with the binary.
pub const BUILTIN: &str = include_str!("../tables.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// CG, PCG, GMRES, PGMRES blocks with one row per nu.
    Iterations,
    /// Fraction of eigenvalues of P^{-1}A with |lambda - 1| > eps, rows nu/eps.
    ClusterFraction,
    /// Count of the same outliers.
    ClusterCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub id: String,
    pub title: String,
    pub layout: Layout,
    pub family: Family,
    #[serde(default = "default_degree")]
    pub degree: usize,
    pub coeff: String,
    pub kind: Kind,
    pub overlap: usize,
    pub nu: Vec<usize>,
    pub n: Vec<usize>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub gmres_restart: Option<usize>,
    /// Published cells in output layout: `[method, nu, cells..]` for
    /// iteration tables, `["nu/eps", cells..]` for clustering tables.
    #[serde(default)]
    pub reference: Vec<Vec<String>>,
}

fn default_degree() -> usize {
    2
}

impl TableSpec {
    pub fn dim(&self, n: usize) -> usize {
        self.family.dim(n, self.degree)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Registry(format!("table '{}': {msg}", self.id)));
        if self.nu.is_empty() || self.n.is_empty() {
            return bad("empty nu or n list");
        }
        if self.layout != Layout::Iterations && self.eps.is_empty() {
            return bad("clustering tables need an eps list");
        }
        if self.layout == Layout::Iterations && self.gmres_restart == Some(0) {
            return bad("gmres_restart must be positive");
        }
        if !self.reference.is_empty() {
            let (rows, width) = match self.layout {
                Layout::Iterations => (4 * self.nu.len(), 2 + self.n.len()),
                _ => (self.nu.len() * self.eps.len(), 1 + self.n.len()),
            };
            if self.reference.len() != rows || self.reference.iter().any(|r| r.len() != width) {
                return bad("reference cells do not match the table layout");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct Manifest {
    table: Vec<TableSpec>,
}

#[derive(Debug, Clone)]
pub struct Registry {
    tables: Vec<TableSpec>,
}

impl Registry {
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN).expect("built-in registry is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let m: Manifest = toml::from_str(text).map_err(|e| CliError::Registry(e.to_string()))?;
        for t in &m.table {
            t.validate()?;
        }
        for (i, t) in m.table.iter().enumerate() {
            if m.table[..i].iter().any(|u| u.id == t.id) {
                return Err(CliError::Registry(format!("duplicate table id '{}'", t.id)));
            }
        }
        Ok(Registry { tables: m.table })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn tables(&self) -> &[TableSpec] {
        &self.tables
    }

    pub fn get(&self, id: &str) -> Result<&TableSpec, CliError> {
        self.tables.iter().find(|t| t.id.eq_ignore_ascii_case(id)).ok_or_else(|| {
            let ids: Vec<&str> = self.tables.iter().map(|t| t.id.as_str()).collect();
            CliError::Usage(format!("unknown table id '{id}' (known: {})", ids.join(", ")))
        })
    }
}

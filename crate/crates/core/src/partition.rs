//! Contiguous overlapping partitions of {0..d_n} into nu subdomains and the
//! gather/scatter maps built on them.
//!
//! Base blocks have near-equal size (the first d_n mod nu get one extra
//! index). Each subdomain is extended by `overlap` indices past every
//! interior split point, so neighbours share 2 * overlap indices. A
//! configuration is admissible iff overlap <= floor(d_n / nu).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("not admissible: overlap {overlap} exceeds base subdomain size {max_overlap} (d_n = {d_n}, nu = {nu})")]
    NotAdmissible {
        d_n: usize,
        nu: usize,
        overlap: usize,
        max_overlap: usize,
    },
    #[error("invalid partition argument: {0}")]
    InvalidArgument(String),
}

/// True iff `make_partition(d_n, nu, overlap)` would succeed.
pub fn is_admissible(d_n: usize, nu: usize, overlap: usize) -> bool {
    nu >= 1 && nu <= d_n && overlap <= d_n / nu
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    d_n: usize,
    nu: usize,
    overlap: usize,
    splits: Vec<usize>,
    extended: Vec<Range<usize>>,
    restricted: Vec<Range<usize>>,
}

pub fn make_partition(d_n: usize, nu: usize, overlap: usize) -> Result<Partition, PartitionError> {
    if nu == 0 || d_n == 0 {
        return Err(PartitionError::InvalidArgument("d_n and nu must be positive".into()));
    }
    if nu > d_n {
        return Err(PartitionError::InvalidArgument(format!(
            "nu = {nu} exceeds d_n = {d_n}"
        )));
    }
    if overlap > d_n / nu {
        return Err(PartitionError::NotAdmissible {
            d_n,
            nu,
            overlap,
            max_overlap: d_n / nu,
        });
    }
    let base = d_n / nu;
    let extra = d_n % nu;
    let mut splits = vec![0];
    for i in 0..nu {
        let size = base + usize::from(i < extra);
        splits.push(splits[i] + size);
    }
    let restricted: Vec<Range<usize>> = (0..nu).map(|i| splits[i]..splits[i + 1]).collect();
    let extended = (0..nu)
        .map(|i| splits[i].saturating_sub(overlap)..(splits[i + 1] + overlap).min(d_n))
        .collect();
    Ok(Partition {
        d_n,
        nu,
        overlap,
        splits,
        extended,
        restricted,
    })
}

impl Partition {
    pub fn dim(&self) -> usize {
        self.d_n
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    /// s_0 = 0 < s_1 < ... < s_nu = d_n.
    pub fn splits(&self) -> &[usize] {
        &self.splits
    }

    /// Overlapping subdomains, half-open 0-based ranges.
    pub fn extended(&self) -> &[Range<usize>] {
        &self.extended
    }

    /// Non-overlapping tiles, half-open 0-based ranges.
    pub fn restricted(&self) -> &[Range<usize>] {
        &self.restricted
    }

    /// Number of extended subdomains containing each index.
    pub fn coverage(&self) -> Vec<usize> {
        let mut c = vec![0; self.d_n];
        for r in &self.extended {
            for v in &mut c[r.clone()] {
                *v += 1;
            }
        }
        c
    }

    /// True when the stricter nesting condition fails somewhere: a subdomain
    /// reaching into the one after its neighbour, or not advancing past it.
    pub fn redundancy_warning(&self) -> bool {
        let e = &self.extended;
        let skips = (0..self.nu.saturating_sub(2)).any(|i| e[i].end > e[i + 2].start);
        let stalls = (0..self.nu.saturating_sub(1))
            .any(|i| e[i].start >= e[i + 1].start || e[i].end >= e[i + 1].end);
        skips || stalls
    }

    /// JSON form with 1-based inclusive [first, last] ranges.
    pub fn to_json(&self) -> serde_json::Value {
        let pairs = |rs: &[Range<usize>]| -> Vec<[usize; 2]> { rs.iter().map(|r| [r.start + 1, r.end]).collect() };
        serde_json::json!({
            "d_n": self.d_n,
            "nu": self.nu,
            "o": self.overlap,
            "splits": self.splits,
            "extended": pairs(&self.extended),
            "restricted": pairs(&self.restricted),
            "redundancy_warning": self.redundancy_warning(),
        })
    }
}

/// How local corrections are prolongated back to the global vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// Scatter into the whole extended range.
    Full,
    /// Scatter only into the restricted tile.
    Restricted,
    /// Scatter into the extended range scaled by 1 / coverage.
    Average,
}

impl WeightScheme {
    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::Full => "full",
            WeightScheme::Restricted => "restricted",
            WeightScheme::Average => "average",
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightScheme {
    type Err = PartitionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(WeightScheme::Full),
            "restricted" => Ok(WeightScheme::Restricted),
            "average" => Ok(WeightScheme::Average),
            _ => Err(PartitionError::InvalidArgument(format!("unknown weight scheme '{s}'"))),
        }
    }
}

/// Gather ranges and diagonal prolongation weights per subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainOperators {
    scheme: WeightScheme,
    dim: usize,
    gather: Vec<Range<usize>>,
    /// `weights[i][k]` multiplies local entry k of subdomain i on scatter.
    weights: Vec<Vec<f64>>,
}

pub fn operators(p: &Partition, scheme: WeightScheme) -> SubdomainOperators {
    let coverage = p.coverage();
    let weights = p
        .extended
        .iter()
        .zip(&p.restricted)
        .map(|(ext, own)| {
            ext.clone()
                .map(|g| match scheme {
                    WeightScheme::Full => 1.0,
                    WeightScheme::Restricted => f64::from(u8::from(own.contains(&g))),
                    WeightScheme::Average => 1.0 / coverage[g] as f64,
                })
                .collect()
        })
        .collect();
    SubdomainOperators {
        scheme,
        dim: p.d_n,
        gather: p.extended.clone(),
        weights,
    }
}

impl SubdomainOperators {
    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.gather.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gather.is_empty()
    }

    pub fn range(&self, i: usize) -> Range<usize> {
        self.gather[i].clone()
    }

    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }

    /// Global indices the scatter of subdomain i writes to.
    pub fn scatter_support(&self, i: usize) -> Vec<usize> {
        self.gather[i]
            .clone()
            .zip(&self.weights[i])
            .filter(|(_, w)| **w != 0.0)
            .map(|(g, _)| g)
            .collect()
    }

    /// R_i v.
    pub fn gather(&self, i: usize, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        v[self.gather[i].clone()].to_vec()
    }

    /// out += W_i^T local.
    pub fn scatter_add(&self, i: usize, local: &[f64], out: &mut [f64]) {
        let r = self.gather[i].clone();
        assert_eq!(local.len(), r.len(), "dimension mismatch");
        assert_eq!(out.len(), self.dim, "dimension mismatch");
        for ((o, l), w) in out[r].iter_mut().zip(local).zip(&self.weights[i]) {
            *o += w * l;
        }
    }
}

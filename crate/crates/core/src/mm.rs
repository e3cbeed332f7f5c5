//! Matrix Market coordinate I/O for [`StructuredMatrix`].
//!
//! Hermitian matrices are written as `symmetric` (lower triangle only);
//! everything else as `general`. Indices in the file are 1-based.

use crate::matrices::{MatrixError, StructuredMatrix, Symmetry};
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub fn write_matrix_market<W: Write>(m: &StructuredMatrix, mut w: W) -> io::Result<()> {
    let sym = m.is_hermitian();
    let kind = if sym { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let entries: Vec<_> = m
        .triplets()
        .into_iter()
        .filter(|(i, j, _)| !sym || j <= i)
        .collect();
    writeln!(w, "{} {} {}", m.dim(), m.dim(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<StructuredMatrix, MarketError> {
    let mut lines = r.lines().enumerate();
    let perr = |line: usize, msg: &str| MarketError::Parse {
        line: line + 1,
        msg: msg.to_string(),
    };
    let (ln, header) = lines.next().ok_or_else(|| perr(0, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(perr(ln, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(perr(ln, "only coordinate format is supported"));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(perr(ln, "only real or integer fields are supported"));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(perr(ln, &format!("unsupported symmetry '{other}'"))),
    };
    let mut size: Option<(usize, usize)> = None;
    let mut trip = Vec::new();
    let mut expected = 0;
    for (ln, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(perr(ln, "size line needs rows, cols, entries"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| perr(ln, "bad integer"));
                let (rows, cols, nnz) = (p(fields[0])?, p(fields[1])?, p(fields[2])?);
                if rows != cols {
                    return Err(perr(ln, "matrix must be square"));
                }
                size = Some((rows, nnz));
                expected = nnz;
            }
            Some((dim, _)) => {
                if fields.len() != 3 {
                    return Err(perr(ln, "entry needs row, col, value"));
                }
                let i: usize = fields[0].parse().map_err(|_| perr(ln, "bad row index"))?;
                let j: usize = fields[1].parse().map_err(|_| perr(ln, "bad column index"))?;
                let v: f64 = fields[2].parse().map_err(|_| perr(ln, "bad value"))?;
                if i == 0 || j == 0 || i > dim || j > dim {
                    return Err(perr(ln, "index out of range"));
                }
                trip.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    trip.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (dim, _) = size.ok_or_else(|| perr(0, "missing size line"))?;
    let read = if symmetric {
        trip.iter().filter(|(i, j, _)| j <= i).count()
    } else {
        trip.len()
    };
    if read != expected {
        return Err(perr(0, &format!("expected {expected} entries, found {read}")));
    }
    let symmetry = if symmetric {
        Symmetry::Hermitian
    } else {
        Symmetry::General
    };
    Ok(StructuredMatrix::from_triplets(dim, trip, symmetry)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_symmetric_and_general() {
        let t = StructuredMatrix::from_band_fn(4, 1, 1, Symmetry::Hermitian, |i, j| {
            if i == j {
                2.0
            } else {
                -1.0
            }
        })
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric\n4 4 7\n"));
        assert_eq!(read_matrix_market(&buf[..]).unwrap(), t);

        let g = StructuredMatrix::from_triplets(2, vec![(0, 1, 3.5), (1, 1, 1.0)], Symmetry::General).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&g, &mut buf).unwrap();
        assert_eq!(read_matrix_market(&buf[..]).unwrap(), g);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_matrix_market(&b"hello\n"[..]).is_err());
        let bad = b"%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(read_matrix_market(&bad[..]), Err(MarketError::Parse { .. })));
        let short = b"%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(read_matrix_market(&short[..]).is_err());
    }
}

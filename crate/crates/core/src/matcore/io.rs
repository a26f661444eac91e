//! Matrix Market coordinate files and newline-delimited permutations.
//!
//! Both formats use 1-based indices on disk.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matcore::{Permutation, SparseMatrix};

pub const MM_HEADER: &str = "%%MatrixMarket matrix coordinate real general";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a square Matrix Market coordinate matrix. `real` and `integer`
/// fields are accepted, with `general` or `symmetric` storage.
pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(hline, "expected a %%MatrixMarket matrix header"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(hline, "only coordinate format is supported"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(hline, format!("unsupported field type {}", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(hline, format!("unsupported symmetry {other}"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = body.next().ok_or_else(|| parse_err(hline + 1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| parse_err(sline, format!("bad integer {s:?}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(parse_err(sline, "size line must hold rows, columns and entry count"));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    if rows != cols {
        return Err(parse_err(sline, format!("matrix must be square, got {rows}x{cols}")));
    }
    let n = rows;

    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut count = 0;
    for (ln, l) in body {
        let mut it = l.split_whitespace();
        let mut index = |what: &str| -> Result<usize> {
            let s = it.next().ok_or_else(|| parse_err(ln, format!("missing {what}")))?;
            let v: usize = s.parse().map_err(|_| parse_err(ln, format!("bad {what} {s:?}")))?;
            if v == 0 || v > n {
                return Err(parse_err(ln, format!("{what} {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let i = index("row index")?;
        let j = index("column index")?;
        let s = it.next().ok_or_else(|| parse_err(ln, "missing value"))?;
        let v: f64 = s.parse().map_err(|_| parse_err(ln, format!("bad value {s:?}")))?;
        triplets.push((i, j, v));
        if symmetric && i != j {
            triplets.push((j, i, v));
        }
        count += 1;
    }
    if count != nnz {
        return Err(parse_err(sline, format!("declared {nnz} entries, found {count}")));
    }
    SparseMatrix::from_triplets(n, triplets)
}

/// Serializes in `general` form with shortest round-trip float formatting.
pub fn format_matrix_market(m: &SparseMatrix) -> String {
    let mut s = String::with_capacity(32 * (m.nnz() + 2));
    s.push_str(MM_HEADER);
    s.push('\n');
    let _ = writeln!(s, "{} {} {}", m.n(), m.n(), m.nnz());
    for (i, j, v) in m.triplets() {
        let _ = writeln!(s, "{} {} {:?}", i + 1, j + 1, v);
    }
    s
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

pub fn write_matrix_market(path: impl AsRef<Path>, m: &SparseMatrix) -> Result<()> {
    fs::write(path, format_matrix_market(m))?;
    Ok(())
}

/// One 1-based image value per line.
pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let mut map = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let t = l.trim();
        if t.is_empty() {
            continue;
        }
        let v: usize = t
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad image value {t:?}")))?;
        if v == 0 {
            return Err(parse_err(i + 1, "image values are 1-based"));
        }
        map.push(v - 1);
    }
    Permutation::new(map)
}

pub fn format_permutation(p: &Permutation) -> String {
    p.as_slice().iter().map(|y| format!("{}\n", y + 1)).collect()
}

pub fn read_permutation(path: impl AsRef<Path>) -> Result<Permutation> {
    parse_permutation(&fs::read_to_string(path)?)
}

pub fn write_permutation(path: impl AsRef<Path>, p: &Permutation) -> Result<()> {
    fs::write(path, format_permutation(p))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{birkhoff_mixture, sample_permutation};

    #[test]
    fn round_trip_is_bit_exact() {
        let q = birkhoff_mixture(9, 3, 17).unwrap();
        let text = format_matrix_market(&q);
        assert!(text.starts_with(MM_HEADER));
        assert_eq!(parse_matrix_market(&text).unwrap(), q);
    }

    #[test]
    fn one_based_on_disk() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 2 0.5\n2 1 1\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 0), 1.0);
    }

    #[test]
    fn symmetric_storage_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 1.0\n3 3 2.0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(m.get(2, 2), 2.0);
    }

    #[test]
    fn malformed_inputs() {
        let bad = [
            "",
            "%%MatrixMarket matrix array real general\n2 2\n",
            "%%MatrixMarket matrix coordinate real general\n2 3 0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 -1.0\n",
            "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1.0 0.0\n",
        ];
        for b in bad {
            assert!(parse_matrix_market(b).is_err(), "accepted {b:?}");
        }
    }

    #[test]
    fn permutation_round_trip() {
        let p = sample_permutation(12, 8).unwrap();
        assert_eq!(parse_permutation(&format_permutation(&p)).unwrap(), p);
        assert!(parse_permutation("1\n1\n").is_err());
        assert!(parse_permutation("0\n1\n").is_err());
    }
}

//! Matrix Market `coordinate real general` reader and writer.
//!
//! Values are written with 17 significant digits, so a write/read cycle is exact.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

pub fn write<W: Write>(a: &SparseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

pub fn write_file(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write(a, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read<R: Read>(input: R) -> Result<SparseMatrix> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse { line: 1, msg: format!("bad header: {header}") });
    }
    if tokens[2] != "coordinate" || tokens[3] != "real" || tokens[4] != "general" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("only 'coordinate real general' is supported, got: {header}"),
        });
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut trip = Vec::new();
    for (ln, line) in lines {
        let line = line?;
        let lineno = ln + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse { line: lineno, msg: format!("{s:?}: {e}") })
        };
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(Error::Parse { line: lineno, msg: "expected 'rows cols nnz'".into() });
                }
                let s = (parse_usize(parts[0])?, parse_usize(parts[1])?, parse_usize(parts[2])?);
                trip.reserve(s.2);
                size = Some(s);
            }
            Some((nr, nc, _)) => {
                if parts.len() != 3 {
                    return Err(Error::Parse { line: lineno, msg: "expected 'row col value'".into() });
                }
                let i = parse_usize(parts[0])?;
                let j = parse_usize(parts[1])?;
                let v: f64 = parts[2]
                    .parse()
                    .map_err(|e| Error::Parse { line: lineno, msg: format!("{}: {e}", parts[2]) })?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("entry ({i}, {j}) outside {nr}x{nc}"),
                    });
                }
                trip.push((i - 1, j - 1, v));
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or(Error::Parse { line: 0, msg: "missing size line".into() })?;
    if trip.len() != nnz {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {nnz} entries, found {}", trip.len()),
        });
    }
    SparseMatrix::from_triplets(nr, nc, &trip)
}

pub fn read_file(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let a = SparseMatrix::from_dense(&[
            vec![std::f64::consts::PI, 0.0, -1.0 / 3.0],
            vec![0.0, 1e-300, 0.0],
            vec![2.0_f64.sqrt(), 0.0, 7.0],
        ])
        .unwrap();
        let mut buf = Vec::new();
        write(&a, &mut buf).unwrap();
        let b = read(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_unsupported_and_malformed() {
        let sym = "%%MatrixMarket matrix coordinate real symmetric\n1 1 1\n1 1 1.0\n";
        assert!(read(sym.as_bytes()).is_err());
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(read(short.as_bytes()).is_err());
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(read(oob.as_bytes()).is_err());
    }

    #[test]
    fn skips_comments() {
        let s = "%%MatrixMarket matrix coordinate real general\n% hi\n2 2 1\n% mid\n2 1 -4.5\n";
        let a = read(s.as_bytes()).unwrap();
        assert_eq!(a.get(1, 0), -4.5);
    }
}

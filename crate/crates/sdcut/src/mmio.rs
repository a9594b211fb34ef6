//! File formats shared by the library and the command line: Matrix Market
//! coordinate symmetric matrices, plain-text vectors (one value per line),
//! and point clouds as CSV (one point per row).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::symlin::SymmetricOperator;
use crate::{Error, Result};

const MM_HEADER: &str = "%%MatrixMarket matrix coordinate real symmetric";

/// Reads a symmetric matrix from a Matrix Market coordinate file.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<SymmetricOperator> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = number_lines(reader);
    read_matrix_lines(&mut lines)
}

/// Writes a symmetric matrix as Matrix Market coordinate symmetric,
/// lower triangle, 1-based indices. Composite and solve-backed operators
/// are materialized first.
pub fn write_matrix(path: impl AsRef<Path>, m: &SymmetricOperator) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_to(&mut w, m)
}

pub fn write_matrix_to(w: &mut impl Write, m: &SymmetricOperator) -> Result<()> {
    let n = m.n();
    // (row >= col, 1-based) per the symmetric coordinate convention.
    let entries: Vec<(usize, usize, f64)> = match m {
        SymmetricOperator::Sparse { entries, .. } => entries
            .iter()
            .filter(|(_, _, v)| *v != 0.0)
            .map(|&(i, j, v)| (j + 1, i + 1, v))
            .collect(),
        _ => {
            let dense = m.to_dense();
            let mut out = Vec::new();
            for j in 0..n {
                for i in j..n {
                    if dense[(i, j)] != 0.0 {
                        out.push((i + 1, j + 1, dense[(i, j)]));
                    }
                }
            }
            out
        }
    };
    writeln!(w, "{MM_HEADER}")?;
    writeln!(w, "{} {} {}", n, n, entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{i} {j} {v}")?;
    }
    Ok(())
}

/// Parses one Matrix Market block from a numbered line stream, consuming
/// exactly the header, the size line, and `nnz` entry lines. The stream may
/// continue afterwards; archive sections rely on that.
pub fn read_matrix_lines<I>(lines: &mut I) -> Result<SymmetricOperator>
where
    I: Iterator<Item = Result<(usize, String)>>,
{
    let (lineno, header) = next_content_line(lines, "matrix header")?;
    let want: Vec<&str> = MM_HEADER.split_whitespace().collect();
    let got: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if got.len() != want.len() || got.iter().zip(&want).any(|(g, w)| g != &w.to_lowercase()) {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected header `{MM_HEADER}`, got `{header}`"),
        });
    }
    let (lineno, size) = next_content_line(lines, "matrix size line")?;
    let dims: Vec<usize> = parse_fields(&size, lineno)?;
    if dims.len() != 3 || dims[0] != dims[1] {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected `n n nnz` with square dimensions, got `{size}`"),
        });
    }
    let (n, nnz) = (dims[0], dims[2]);
    let mut entries = Vec::with_capacity(nnz);
    while entries.len() < nnz {
        let (lineno, entry) = next_content_line(lines, "matrix entry")?;
        let fields: Vec<&str> = entry.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `i j value`, got `{entry}`"),
            });
        }
        let i: usize = parse_one(fields[0], lineno)?;
        let j: usize = parse_one(fields[1], lineno)?;
        let v: f64 = parse_one(fields[2], lineno)?;
        if i < 1 || i > n || j < 1 || j > n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("index ({i}, {j}) outside 1..={n}"),
            });
        }
        entries.push((i - 1, j - 1, v));
    }
    SymmetricOperator::sparse(n, entries)
}

/// Reads a dense vector stored one value per line.
pub fn read_vector(path: impl AsRef<Path>) -> Result<DVector<f64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut vals = Vec::new();
    for item in number_lines(reader) {
        let (lineno, line) = item?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        vals.push(parse_one(t, lineno)?);
    }
    Ok(DVector::from_vec(vals))
}

pub fn write_vector(path: impl AsRef<Path>, v: &DVector<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for x in v.iter() {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

/// Writes a binary solution as +-1 integers, one per line.
pub fn write_signs(path: impl AsRef<Path>, x: &DVector<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in x.iter() {
        writeln!(w, "{}", if *v >= 0.0 { 1 } else { -1 })?;
    }
    Ok(())
}

/// Reads a point cloud from CSV, one comma-separated point per row.
/// All rows must have the same dimension.
pub fn read_points(path: impl AsRef<Path>) -> Result<Vec<DVector<f64>>> {
    let reader = BufReader::new(File::open(path)?);
    let mut points: Vec<DVector<f64>> = Vec::new();
    for item in number_lines(reader) {
        let (lineno, line) = item?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let coords: Vec<f64> = t
            .split(',')
            .map(|f| parse_one(f.trim(), lineno))
            .collect::<Result<_>>()?;
        if let Some(first) = points.first() {
            if coords.len() != first.len() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!(
                        "point has {} coordinates, earlier points have {}",
                        coords.len(),
                        first.len()
                    ),
                });
            }
        }
        points.push(DVector::from_vec(coords));
    }
    Ok(points)
}

pub fn write_points(path: impl AsRef<Path>, points: &[DVector<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for p in points {
        let row: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Wraps a reader into numbered lines with io errors mapped into ours.
pub fn number_lines(r: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines()
        .enumerate()
        .map(|(i, l)| l.map(|s| (i + 1, s)).map_err(Error::from))
}

/// Next line that is neither blank nor a `%` comment.
fn next_content_line<I>(lines: &mut I, what: &str) -> Result<(usize, String)>
where
    I: Iterator<Item = Result<(usize, String)>>,
{
    for item in lines {
        let (lineno, line) = item?;
        let t = line.trim();
        if t.is_empty() || (t.starts_with('%') && !t.starts_with("%%")) {
            continue;
        }
        // The `%%MatrixMarket` banner is content; later `%%` lines are not
        // expected and fall through to the caller's format check.
        return Ok((lineno, line));
    }
    Err(Error::Parse {
        line: 0,
        msg: format!("unexpected end of input, wanted {what}"),
    })
}

fn parse_fields<T: std::str::FromStr>(line: &str, lineno: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|f| parse_one(f, lineno))
        .collect()
}

fn parse_one<T: std::str::FromStr>(field: &str, lineno: usize) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line: lineno,
        msg: format!("cannot parse `{field}`"),
    })
}

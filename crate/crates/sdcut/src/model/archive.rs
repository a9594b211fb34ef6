//! Single-file archive for a relaxation: a key=value scalar header, the
//! objective as an embedded Matrix Market block, and one line per
//! constraint (tag, parameters, b, sense). Values are printed with Rust's
//! shortest round-trip float formatting, so write/read is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::mmio;
use crate::symlin::ConstraintMatrix;
use crate::{Error, Result};

use super::{ConstraintSpec, Relaxation, Sense};

const MAGIC: &str = "sdcut-archive v1";

pub fn write_archive_file(path: impl AsRef<Path>, r: &Relaxation) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_archive(&mut w, r)
}

pub fn read_archive_file(path: impl AsRef<Path>) -> Result<Relaxation> {
    read_archive(BufReader::new(File::open(path)?))
}

pub fn write_archive(w: &mut impl Write, r: &Relaxation) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "[scalars]")?;
    writeln!(w, "n={}", r.n())?;
    writeln!(w, "m={}", r.m())?;
    writeln!(w, "num_eq={}", r.num_equalities)?;
    writeln!(w, "eta={}", r.eta)?;
    writeln!(w, "sigma={}", r.sigma)?;
    writeln!(w, "order={}", join(r.order.iter()))?;
    writeln!(w, "[objective]")?;
    mmio::write_matrix_to(w, &r.a)?;
    writeln!(w, "[constraints]")?;
    for c in &r.constraints {
        writeln!(w, "{}", constraint_line(c))?;
    }
    Ok(())
}

pub fn read_archive(r: impl BufRead) -> Result<Relaxation> {
    let mut lines = mmio::number_lines(r);
    expect_line(&mut lines, MAGIC)?;
    expect_line(&mut lines, "[scalars]")?;

    let mut n = None;
    let mut m = None;
    let mut num_eq = None;
    let mut eta = None;
    let mut sigma = None;
    let mut order: Option<Vec<usize>> = None;
    loop {
        let (lineno, line) = next_line(&mut lines)?;
        let t = line.trim();
        if t == "[objective]" {
            break;
        }
        let (key, value) = t.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("expected key=value, got `{t}`"),
        })?;
        match key {
            "n" => n = Some(parse(value, lineno)?),
            "m" => m = Some(parse(value, lineno)?),
            "num_eq" => num_eq = Some(parse(value, lineno)?),
            "eta" => eta = Some(parse(value, lineno)?),
            "sigma" => sigma = Some(parse(value, lineno)?),
            "order" => order = Some(parse_list(value, lineno)?),
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown scalar key `{other}`"),
                })
            }
        }
    }
    let missing = |what: &str| Error::Parse {
        line: 0,
        msg: format!("scalar section is missing `{what}`"),
    };
    let n: usize = n.ok_or_else(|| missing("n"))?;
    let m: usize = m.ok_or_else(|| missing("m"))?;
    let num_eq: usize = num_eq.ok_or_else(|| missing("num_eq"))?;
    let eta: f64 = eta.ok_or_else(|| missing("eta"))?;
    let sigma: f64 = sigma.ok_or_else(|| missing("sigma"))?;
    let order = order.ok_or_else(|| missing("order"))?;

    let a = mmio::read_matrix_lines(&mut lines)?;
    if a.n() != n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("objective dimension {} does not match n={n}", a.n()),
        });
    }

    expect_line(&mut lines, "[constraints]")?;
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let (lineno, line) = next_line(&mut lines)?;
        let c = parse_constraint(line.trim(), lineno, n)?;
        c.matrix.check_dim(n)?;
        constraints.push(c);
    }

    if num_eq > m
        || constraints[..num_eq].iter().any(|c| c.sense != Sense::Equality)
        || constraints[num_eq..].iter().any(|c| c.sense != Sense::LessEq)
    {
        return Err(Error::Parse {
            line: 0,
            msg: "constraints are not ordered equalities-first per num_eq".into(),
        });
    }
    let mut seen = vec![false; m];
    if order.len() != m || order.iter().any(|&i| i >= m || std::mem::replace(&mut seen[i], true))
    {
        return Err(Error::Parse {
            line: 0,
            msg: "order is not a permutation of the constraint indices".into(),
        });
    }

    Ok(Relaxation {
        a,
        constraints,
        num_equalities: num_eq,
        eta,
        sigma,
        order,
    })
}

fn constraint_line(c: &ConstraintSpec) -> String {
    let sense = match c.sense {
        Sense::Equality => "eq",
        Sense::LessEq => "le",
    };
    let body = match &c.matrix {
        ConstraintMatrix::DiagUnit(i) => format!("diag_unit {i}"),
        ConstraintMatrix::Diag(d) => format!("diag {}", join(d.iter())),
        ConstraintMatrix::RankOne { v, s } => format!("rank_one {s} {}", join(v.iter())),
        ConstraintMatrix::EntryPair(i, j) => format!("entry_pair {i} {j}"),
        ConstraintMatrix::RowLink(i) => format!("row_link {i}"),
        ConstraintMatrix::Sparse { entries, .. } => {
            let trips: Vec<String> = entries
                .iter()
                .map(|(i, j, v)| format!("{i}:{j}:{v}"))
                .collect();
            let list = if trips.is_empty() {
                "-".to_string()
            } else {
                trips.join(";")
            };
            format!("sparse {list}")
        }
    };
    format!("{body} {} {sense}", c.b)
}

fn parse_constraint(line: &str, lineno: usize, n: usize) -> Result<ConstraintSpec> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let bad = |msg: String| Error::Parse { line: lineno, msg };
    if fields.len() < 3 {
        return Err(bad(format!("constraint line too short: `{line}`")));
    }
    let sense = match fields[fields.len() - 1] {
        "eq" => Sense::Equality,
        "le" => Sense::LessEq,
        other => return Err(bad(format!("unknown sense `{other}`"))),
    };
    let b: f64 = parse(fields[fields.len() - 2], lineno)?;
    let args = &fields[1..fields.len() - 2];
    let argc = |want: usize| -> Result<()> {
        if args.len() == want {
            Ok(())
        } else {
            Err(Error::Parse {
                line: lineno,
                msg: format!(
                    "tag `{}` takes {want} parameter(s), got {}",
                    fields[0],
                    args.len()
                ),
            })
        }
    };
    let matrix = match fields[0] {
        "diag_unit" => {
            argc(1)?;
            ConstraintMatrix::DiagUnit(parse(args[0], lineno)?)
        }
        "diag" => {
            argc(1)?;
            ConstraintMatrix::Diag(DVector::from_vec(parse_list(args[0], lineno)?))
        }
        "rank_one" => {
            argc(2)?;
            ConstraintMatrix::rank_one(
                DVector::from_vec(parse_list(args[1], lineno)?),
                parse(args[0], lineno)?,
            )
        }
        "entry_pair" => {
            argc(2)?;
            ConstraintMatrix::EntryPair(parse(args[0], lineno)?, parse(args[1], lineno)?)
        }
        "row_link" => {
            argc(1)?;
            ConstraintMatrix::RowLink(parse(args[0], lineno)?)
        }
        "sparse" => {
            argc(1)?;
            let mut entries = Vec::new();
            if args[0] != "-" {
                for trip in args[0].split(';') {
                    let parts: Vec<&str> = trip.split(':').collect();
                    if parts.len() != 3 {
                        return Err(bad(format!("expected i:j:v, got `{trip}`")));
                    }
                    entries.push((
                        parse(parts[0], lineno)?,
                        parse(parts[1], lineno)?,
                        parse(parts[2], lineno)?,
                    ));
                }
            }
            ConstraintMatrix::Sparse { n, entries }
        }
        other => return Err(bad(format!("unknown constraint tag `{other}`"))),
    };
    Ok(ConstraintSpec { matrix, b, sense })
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse<T: std::str::FromStr>(field: &str, lineno: usize) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line: lineno,
        msg: format!("cannot parse `{field}`"),
    })
}

fn parse_list<T: std::str::FromStr>(value: &str, lineno: usize) -> Result<Vec<T>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|f| parse(f, lineno)).collect()
}

fn next_line<I>(lines: &mut I) -> Result<(usize, String)>
where
    I: Iterator<Item = Result<(usize, String)>>,
{
    for item in lines {
        let (lineno, line) = item?;
        if !line.trim().is_empty() {
            return Ok((lineno, line));
        }
    }
    Err(Error::Parse {
        line: 0,
        msg: "unexpected end of archive".into(),
    })
}

fn expect_line<I>(lines: &mut I, want: &str) -> Result<()>
where
    I: Iterator<Item = Result<(usize, String)>>,
{
    let (lineno, line) = next_line(lines)?;
    if line.trim() == want {
        Ok(())
    } else {
        Err(Error::Parse {
            line: lineno,
            msg: format!("expected `{want}`, got `{}`", line.trim()),
        })
    }
}

//! Text formats: TNS v1 tensors, headerless CSV matrices, and planted-truth
//! sidecars.
//!
//! TNS v1: line 1 is the order m, line 2 holds the m dimensions, and every
//! following token is an entry in row-major order. Lines starting with '#'
//! are ignored anywhere in the file.
//!
//! Truth sidecar: a `k` line with the per-dimension cluster counts, one line
//! of labels per dimension, and a final `J` line with the planted objective.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("not a number: {tok:?}"),
    })
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("not a non-negative integer: {tok:?}"),
    })
}

pub fn parse_tns(text: &str) -> Result<DenseTensor> {
    let mut lines = content_lines(text);
    let (l1, order_line) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing order line".into(),
    })?;
    let order = parse_usize(order_line, l1)?;
    let (l2, dims_line) = lines.next().ok_or(Error::Parse {
        line: l1 + 1,
        msg: "missing dimension line".into(),
    })?;
    let dims = dims_line
        .split_whitespace()
        .map(|t| parse_usize(t, l2))
        .collect::<Result<Vec<_>>>()?;
    if dims.len() != order {
        return Err(Error::Parse {
            line: l2,
            msg: format!("order {order} but {} dimensions given", dims.len()),
        });
    }
    let shape = Shape::new(dims).map_err(|e| Error::Parse {
        line: l2,
        msg: e.to_string(),
    })?;
    let mut data = Vec::with_capacity(shape.len());
    let mut last_line = l2;
    for (ln, line) in lines {
        last_line = ln;
        for tok in line.split_whitespace() {
            data.push(parse_f64(tok, ln)?);
        }
    }
    if data.len() != shape.len() {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("expected {} values, found {}", shape.len(), data.len()),
        });
    }
    DenseTensor::new(shape, data)
}

pub fn format_tns(a: &DenseTensor) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", a.order());
    let dims: Vec<String> = a.dims().iter().map(usize::to_string).collect();
    let _ = writeln!(out, "{}", dims.join(" "));
    let row = *a.dims().last().expect("order >= 1");
    for chunk in a.data().chunks(row) {
        let vals: Vec<String> = chunk.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "{}", vals.join(" "));
    }
    out
}

/// Headerless CSV, one matrix row per line.
pub fn parse_csv_matrix(text: &str) -> Result<DenseTensor> {
    let mut rows = 0;
    let mut cols = None;
    let mut data = Vec::new();
    for (ln, line) in content_lines(text) {
        let vals = line
            .split(',')
            .map(|t| parse_f64(t.trim(), ln))
            .collect::<Result<Vec<_>>>()?;
        match cols {
            None => cols = Some(vals.len()),
            Some(c) if c != vals.len() => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {c} columns, found {}", vals.len()),
                })
            }
            Some(_) => {}
        }
        data.extend(vals);
        rows += 1;
    }
    let cols = cols.ok_or(Error::Parse {
        line: 1,
        msg: "empty CSV".into(),
    })?;
    DenseTensor::from_dims(&[rows, cols], data)
}

/// Reads a tensor, choosing CSV for `.csv` files and TNS v1 otherwise.
pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    let text = std::fs::read_to_string(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_csv_matrix(&text)
    } else {
        parse_tns(&text)
    }
}

pub fn write_tensor(path: &Path, a: &DenseTensor) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(format_tns(a).as_bytes())?;
    f.flush()?;
    Ok(())
}

/// A planted clustering as stored next to a generated tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub k: Vec<usize>,
    pub labels: Vec<Vec<usize>>,
    pub objective: f64,
}

pub fn format_truth(truth: &Truth) -> String {
    let mut out = String::from("# planted clustering\n");
    let ks: Vec<String> = truth.k.iter().map(usize::to_string).collect();
    let _ = writeln!(out, "k {}", ks.join(" "));
    for labels in &truth.labels {
        let ls: Vec<String> = labels.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}", ls.join(" "));
    }
    let _ = writeln!(out, "J {}", truth.objective);
    out
}

pub fn parse_truth(text: &str) -> Result<Truth> {
    let mut k = None;
    let mut labels = Vec::new();
    let mut objective = None;
    for (ln, line) in content_lines(text) {
        let mut toks = line.split_whitespace().peekable();
        match toks.peek().copied() {
            Some("k") => {
                toks.next();
                k = Some(toks.map(|t| parse_usize(t, ln)).collect::<Result<Vec<_>>>()?);
            }
            Some("J") => {
                toks.next();
                let tok = toks.next().ok_or(Error::Parse {
                    line: ln,
                    msg: "missing objective value".into(),
                })?;
                objective = Some(parse_f64(tok, ln)?);
            }
            _ => labels.push(toks.map(|t| parse_usize(t, ln)).collect::<Result<Vec<_>>>()?),
        }
    }
    let k = k.ok_or(Error::Parse {
        line: 1,
        msg: "missing k line".into(),
    })?;
    let objective = objective.ok_or(Error::Parse {
        line: 1,
        msg: "missing J line".into(),
    })?;
    if labels.len() != k.len() {
        return Err(Error::Parse {
            line: 1,
            msg: format!("{} label lines for {} dimensions", labels.len(), k.len()),
        });
    }
    for (j, (ls, &kj)) in labels.iter().zip(&k).enumerate() {
        if let Some(&bad) = ls.iter().find(|&&l| l >= kj) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("label {bad} in dimension {j} exceeds k = {kj}"),
            });
        }
    }
    Ok(Truth {
        k,
        labels,
        objective,
    })
}

pub fn read_truth(path: &Path) -> Result<Truth> {
    let f = std::fs::File::open(path)?;
    let mut text = String::new();
    for line in std::io::BufReader::new(f).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    parse_truth(&text)
}

pub fn write_truth(path: &Path, truth: &Truth) -> Result<()> {
    std::fs::write(path, format_truth(truth))?;
    Ok(())
}

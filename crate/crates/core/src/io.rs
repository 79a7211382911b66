//! Plain-text file formats.
//!
//! * data: one point per line, comma-separated reals, no header;
//! * labels: one nonnegative integer per line;
//! * affinity: `i,j,w` per line, 0-based, `i < j` (upper triangle only).
//!
//! Reals are written in scientific notation with 17 significant digits, so a
//! write followed by a read reproduces every value exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::affinity::AffinityMatrix;
use crate::datagen::DataMatrix;
use crate::error::{Error, Result};

/// Formats a real with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-blank lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses data text; `source` names the origin in error messages.
pub fn parse_data(text: &str, source: &Path) -> Result<DataMatrix> {
    let mut dim = None;
    let mut values = Vec::new();
    for (line, l) in content_lines(text) {
        let before = values.len();
        for field in l.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(source, line, format!("`{}` is not a number", field.trim())))?;
            if !v.is_finite() {
                return Err(parse_err(source, line, format!("non-finite value `{}`", field.trim())));
            }
            values.push(v);
        }
        let width = values.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(parse_err(source, line, format!("expected {d} values, found {width}")));
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| parse_err(source, 1, "no data rows"))?;
    DataMatrix::from_columns(dim, values)
}

/// Reads a data file, unit-normalizing every point unless `normalize` is false.
pub fn read_data(path: &Path, normalize: bool) -> Result<DataMatrix> {
    let x = parse_data(&read_text(path)?, path)?;
    Ok(if normalize { x.normalized() } else { x })
}

pub fn format_data(x: &DataMatrix) -> String {
    let mut out = String::new();
    for p in x.points() {
        let row: Vec<String> = p.iter().map(|&v| format_real(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_data(path: &Path, x: &DataMatrix) -> Result<()> {
    write_text(path, &format_data(x))
}

pub fn parse_labels(text: &str, source: &Path) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(line, l)| {
            l.parse::<usize>()
                .map_err(|_| parse_err(source, line, format!("`{l}` is not a nonnegative integer")))
        })
        .collect()
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    parse_labels(&read_text(path)?, path)
}

pub fn format_labels(labels: &[usize]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        writeln!(out, "{l}").expect("writing to a String cannot fail");
    }
    out
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    write_text(path, &format_labels(labels))
}

/// Parses affinity triplets for a graph on `n` points.
pub fn parse_affinity(text: &str, n: usize, source: &Path) -> Result<AffinityMatrix> {
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(
                source,
                line,
                format!("expected `i,j,w`, found {} fields", fields.len()),
            ));
        }
        let idx = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| parse_err(source, line, format!("`{f}` is not an index")))
        };
        let (i, j) = (idx(fields[0])?, idx(fields[1])?);
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(source, line, format!("`{}` is not a number", fields[2])))?;
        if i >= j {
            return Err(parse_err(
                source,
                line,
                format!("entry ({i}, {j}) is not in the upper triangle"),
            ));
        }
        if j >= n {
            return Err(parse_err(
                source,
                line,
                format!("index {j} out of range for {n} points"),
            ));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(parse_err(
                source,
                line,
                format!("weight `{}` must be finite and nonnegative", fields[2]),
            ));
        }
        if !seen.insert((i, j)) {
            return Err(parse_err(source, line, format!("duplicate entry ({i}, {j})")));
        }
        entries.push((i, j, w));
    }
    AffinityMatrix::from_triplets(n, entries)
}

pub fn read_affinity(path: &Path, n: usize) -> Result<AffinityMatrix> {
    parse_affinity(&read_text(path)?, n, path)
}

pub fn format_affinity(w: &AffinityMatrix) -> String {
    let mut out = String::new();
    for (i, j, v) in w.upper_triplets() {
        writeln!(out, "{i},{j},{}", format_real(v)).expect("writing to a String cannot fail");
    }
    out
}

pub fn write_affinity(path: &Path, w: &AffinityMatrix) -> Result<()> {
    write_text(path, &format_affinity(w))
}

/// Writes arbitrary text, mapping failures to an I/O error naming `path`.
pub fn write_file(path: impl Into<PathBuf>, text: &str) -> Result<()> {
    write_text(&path.into(), text)
}

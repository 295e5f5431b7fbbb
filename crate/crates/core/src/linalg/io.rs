//! Plain-text matrices: rows separated by `;` or newlines, entries by
//! whitespace, each entry `re` or `re,im`. Lines starting with `#` are skipped.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

fn parse_entry(token: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("bad matrix entry `{token}`"));
    let mut parts = token.split(',');
    let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(s) => s.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        for row in line.split(';') {
            let row = row.trim();
            if row.is_empty() {
                continue;
            }
            rows.push(row.split_whitespace().map(parse_entry).collect::<Result<_>>()?);
        }
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("rows have different lengths".into()));
    }
    let n_rows = rows.len();
    ComplexMatrix::from_vec(n_rows, cols, rows.into_iter().flatten().collect())
}

/// One row per line, entries as `re,im` in shortest round-trip form.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| {
                let z = m[(i, j)];
                format!("{},{}", z.re, z.im)
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

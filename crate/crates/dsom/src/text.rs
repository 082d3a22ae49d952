//! Comma-separated numeric text with six significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dsom_core::linalg::Matrix;

/// Formats like C's `%.6g`.
pub fn fmt_g6(v: f64) -> String {
    const P: i32 = 6;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, v);
        strip_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One line per matrix row, no header.
pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 10);
    for row in m.iter_rows() {
        push_row(&mut out, row.iter().map(|&v| v as f64));
    }
    out
}

pub fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", fmt_g6(v));
    }
    out.push('\n');
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    fs::write(path, matrix_to_csv(m)).with_context(|| format!("writing {}", path.display()))
}

/// Writes `values` as `rows` lines of `values.len() / rows` entries.
pub fn write_grid(path: &Path, values: &[f32], rows: usize) -> Result<()> {
    let m = Matrix::new(rows, values.len() / rows, values.to_vec())?;
    write_matrix(path, &m)
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f32 = field.trim().parse().with_context(|| format!("line {}: bad number {field:?}", n + 1))?;
            data.push(v);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => bail!("line {}: {width} fields, expected {c}", n + 1),
            _ => {}
        }
        rows += 1;
    }
    let Some(cols) = cols else { bail!("no rows") };
    Ok(Matrix::new(rows, cols, data)?)
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))
}

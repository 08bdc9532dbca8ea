//! Plain-text matrix files: a `D W` line, then `D·W` entries as `re im`
//! pairs in row-major order. Whitespace and line breaks are free-form after
//! the header; `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let mut next_usize = |what: &str| -> Result<usize> {
        let t = tokens.next().ok_or_else(|| Error::Parse(format!("missing {what}")))?;
        t.parse().map_err(|_| Error::Parse(format!("bad {what} {t:?}")))
    };
    let d = next_usize("row count")?;
    let w = next_usize("column count")?;
    if d == 0 || w == 0 {
        return Err(Error::Parse(format!("dimensions must be positive, got {d} x {w}")));
    }
    let values: Vec<f64> = tokens
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?}"))))
        .collect::<Result<_>>()?;
    if values.len() != 2 * d * w {
        return Err(Error::Parse(format!(
            "expected {} numbers for a {d} x {w} matrix, got {}",
            2 * d * w,
            values.len()
        )));
    }
    let data = values.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
    ComplexMatrix::new(d, w, data).map_err(|e| Error::Parse(e.to_string()))
}

pub fn format_matrix(x: &ComplexMatrix) -> String {
    let (d, w) = x.shape();
    let mut out = format!("{d} {w}\n");
    for i in 0..d {
        let row: Vec<String> = (0..w).map(|j| format!("{} {}", x[(i, j)].re, x[(i, j)].im)).collect();
        let _ = writeln!(out, "{}", row.join("  "));
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn write_matrix(x: &ComplexMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, format_matrix(x)).map_err(|e| Error::io(path, e))
}

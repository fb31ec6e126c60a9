//! Matrix interchange format: a `rows cols` header line followed by one line of
//! space-separated reals per row. Node labels travel in a JSON array sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Matrix;
use crate::error::{Error, Result};

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let mut first = true;
        for x in m.row(i) {
            if !first {
                out.push(' ');
            }
            first = false;
            // shortest representation that round-trips exactly
            write!(out, "{x:e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<Matrix> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `rows cols` header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(hline, format!("bad header: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(hline, "header must be `rows cols`".into()));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (lineno, line) in lines {
        if seen == rows {
            return Err(parse_err(lineno, format!("more than {rows} rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let x: f64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("not a number: {tok:?}")))?;
            data.push(x);
        }
        if data.len() - before != cols {
            return Err(parse_err(
                lineno,
                format!("expected {cols} values, found {}", data.len() - before),
            ));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(parse_err(hline, format!("expected {rows} rows, found {seen}")));
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[String]) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(labels).expect("string list serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

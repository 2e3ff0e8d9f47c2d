//! Plain-text matrix files: a `rows,cols` header line, then one
//! comma-separated line per row. Values are written with 17 significant
//! digits so a write/read round trip is bit-exact for f64.

use std::fmt::Write as _;
use std::path::Path;

use simplecal::{Matrix64, Vector64};

#[derive(Debug)]
pub struct FileError {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for FileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path, line, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for FileError {}

fn file_error(path: &Path, line: Option<usize>, message: String) -> FileError {
    FileError {
        path: path.display().to_string(),
        line,
        message,
    }
}

pub fn format_matrix(m: &Matrix64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{},{}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn write_matrix(path: &Path, m: &Matrix64) -> Result<(), FileError> {
    std::fs::write(path, format_matrix(m))
        .map_err(|e| file_error(path, None, format!("cannot write: {e}")))
}

pub fn parse_matrix(path: &Path, text: &str) -> Result<Matrix64, FileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| file_error(path, None, "empty matrix file".into()))?;
    let dims: Vec<&str> = header.split(',').map(str::trim).collect();
    if dims.len() != 2 {
        return Err(file_error(
            path,
            Some(header_line),
            format!("expected `rows,cols` header, got `{header}`"),
        ));
    }
    let rows: usize = dims[0].parse().map_err(|_| {
        file_error(path, Some(header_line), format!("bad row count `{}`", dims[0]))
    })?;
    let cols: usize = dims[1].parse().map_err(|_| {
        file_error(path, Some(header_line), format!("bad column count `{}`", dims[1]))
    })?;
    let mut values = Vec::with_capacity(rows * cols);
    for (line_no, line) in lines {
        for token in line.split(&[',', ' ', '\t']).filter(|t| !t.is_empty()) {
            let v: f64 = token.parse().map_err(|_| {
                file_error(path, Some(line_no), format!("bad number `{token}`"))
            })?;
            values.push(v);
        }
    }
    if values.len() != rows * cols {
        return Err(file_error(
            path,
            None,
            format!("expected {} values for a {rows}x{cols} matrix, found {}", rows * cols, values.len()),
        ));
    }
    Ok(Matrix64::from_row_slice(rows, cols, &values))
}

pub fn read_matrix(path: &Path) -> Result<Matrix64, FileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| file_error(path, None, format!("cannot read: {e}")))?;
    parse_matrix(path, &text)
}

pub fn write_vector(path: &Path, v: &Vector64) -> Result<(), FileError> {
    let m = Matrix64::from_fn(v.len(), 1, |i, _| v[i]);
    write_matrix(path, &m)
}

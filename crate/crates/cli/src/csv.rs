//! CSV tables with a '#'-comment provenance header.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Scientific notation with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x == 0.0 {
        // no negative zero in output
        format!("{:.11e}", 0.0)
    } else {
        format!("{x:.11e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file_name: &str, columns: &[&str]) -> Self {
        Table {
            file_name: file_name.to_string(),
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn render(&self, command: &str, config_hash: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# metaline {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command: {command}");
        let _ = writeln!(s, "# config_sha256: {config_hash}");
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

pub fn write_tables(
    dir: &Path,
    stem: &str,
    command: &str,
    config_hash: &str,
    tables: &[Table],
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for t in tables {
        let path = dir.join(format!("{stem}{}", t.file_name));
        std::fs::write(&path, t.render(command, config_hash)).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(4.0e9), "4.00000000000e9");
        assert_eq!(format_number(-1.234_567_890_123_4e-3), "-1.23456789012e-3");
        assert_eq!(format_number(-0.0), "0.00000000000e0");
        assert_eq!(format_number(f64::NAN), "nan");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn header_then_rows() {
        let mut t = Table::new("x.csv", &["n", "f", "tag"]);
        t.comment("omega_ir_ghz = 4");
        t.push(vec![3usize.into(), 0.5.into(), "a".into()]);
        let s = t.render("modes", "abc");
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(
            lines[0],
            format!("# metaline {}", env!("CARGO_PKG_VERSION"))
        );
        assert_eq!(lines[1], "# command: modes");
        assert_eq!(lines[2], "# config_sha256: abc");
        assert_eq!(lines[3], "# omega_ir_ghz = 4");
        assert_eq!(lines[4], "n,f,tag");
        assert_eq!(lines[5], "3,5.00000000000e-1,a");
    }
}

//! Deterministic artifact output: CSV tables, JSON reports and gnuplot
//! scripts, all written atomically (temp file + rename) so interrupted runs
//! never leave partial artifacts.
//!
//! Floats are formatted with a fixed scientific format so that reruns of a
//! seeded scenario are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Fixed float format used in every CSV cell.
pub fn fmt(x: f64) -> String {
    if x == 0.0 {
        "0.000000000000e0".to_string()
    } else {
        format!("{x:.12e}")
    }
}

/// Write bytes atomically (write to `<path>.tmp`, then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = PathBuf::from(format!("{}.tmp", path.display()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV table with a fixed header; rows are formatted with [`fmt`].
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.header.len());
        self.rows.push(row.iter().map(|&x| fmt(x)).collect());
    }

    pub fn push_mixed(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_string(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_string().as_bytes())
    }
}

/// Serialize a report to pretty JSON, atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    write_atomic(path, text.as_bytes())
}

/// Emit a self-contained gnuplot script for a log-log fit figure reading
/// `csv_name` (columns `x,y`), overlaying the fitted power law.
pub fn gnuplot_loglog(
    path: &Path,
    csv_name: &str,
    title: &str,
    exponent: f64,
    prefactor: f64,
) -> Result<()> {
    let script = format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set title '{title}'\n\
         set key left bottom\n\
         plot '{csv_name}' skip 1 using 1:2 with points pt 7 title 'data', \\\n\
         \x20    {prefactor:.6e} * x**(-{exponent:.6e}) with lines title 'fit t^-{exponent:.3}'\n"
    );
    write_atomic(path, script.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_formatting_is_stable() {
        let mut t = CsvTable::new(&["t", "value"]);
        t.push(&[1.0, 0.5]);
        t.push(&[2.0, 0.0]);
        let s = t.to_string();
        assert_eq!(
            s,
            "t,value\n1.000000000000e0,5.000000000000e-1\n2.000000000000e0,0.000000000000e0\n"
        );
    }

    #[test]
    fn atomic_write_round_trip() {
        let dir = std::env::temp_dir().join("scatterlab_io_test");
        let path = dir.join("table.csv");
        let mut t = CsvTable::new(&["a"]);
        t.push(&[3.25]);
        t.write(&path).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert!(body.starts_with("a\n"));
        assert!(!dir.join("table.csv.tmp").exists());
    }
}

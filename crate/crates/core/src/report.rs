//! Experiment reports: aligned text tables plus a tab-separated variant.
//!
//! A report file starts with `#report <name>`, then the config snapshot as
//! `#config key = value` lines, then each table. In the `.tsv` variant every
//! table row is `<table>\t<col1>\t<col2>...`, preceded by a header row whose
//! first field is `#<table>`. Reports never contain wall-clock times, so
//! reruns with the same config produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{cell:>w$}");
            }
            s.trim_end().to_string()
        };
        let mut out = format!("## {}\n", self.name);
        out.push_str(&line(&self.columns));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("#{}\t{}\n", self.name, self.columns.join("\t"));
        for row in &self.rows {
            let _ = writeln!(out, "{}\t{}", self.name, row.join("\t"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub name: String,
    pub config: String,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(name: &str, config_snapshot: &str) -> Self {
        ExperimentReport {
            name: name.to_string(),
            config: config_snapshot.to_string(),
            ..Default::default()
        }
    }

    fn header(&self) -> String {
        let mut out = format!("#report {}\n", self.name);
        for line in self.config.lines() {
            let _ = writeln!(out, "#config {line}");
        }
        for note in &self.notes {
            let _ = writeln!(out, "#note {note}");
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header();
        for t in &self.tables {
            out.push('\n');
            out.push_str(&t.to_text());
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.header();
        for t in &self.tables {
            out.push_str(&t.to_tsv());
        }
        out
    }

    /// Writes `<dir>/<name>.txt` and `<dir>/<name>.tsv`.
    pub fn write(&self, dir: impl AsRef<Path>) -> io::Result<[PathBuf; 2]> {
        fs::create_dir_all(dir.as_ref())?;
        let txt = dir.as_ref().join(format!("{}.txt", self.name));
        let tsv = dir.as_ref().join(format!("{}.tsv", self.name));
        fs::write(&txt, self.to_text())?;
        fs::write(&tsv, self.to_tsv())?;
        Ok([txt, tsv])
    }
}

/// Fixed-precision float formatting used in every table.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.4}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders() {
        let mut t = Table::new("acc", &["n", "accuracy"]);
        t.push(vec!["1".into(), fmt_f(0.5)]);
        t.push(vec!["20".into(), fmt_f(1.0)]);
        assert_eq!(t.to_text(), "## acc\n n  accuracy\n 1    0.5000\n20    1.0000\n");
        assert_eq!(t.to_tsv(), "#acc\tn\taccuracy\nacc\t1\t0.5000\nacc\t20\t1.0000\n");
        let mut r = ExperimentReport::new("x", "seed = 1\n");
        r.tables.push(t);
        assert!(r.to_text().starts_with("#report x\n#config seed = 1\n\n## acc\n"));
    }
}

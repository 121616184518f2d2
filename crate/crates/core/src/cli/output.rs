//! CSV output. Every file starts with a `# schema=1` line; numbers are
//! written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::{Error, Result};

pub const SCHEMA_LINE: &str = "# schema=1";

/// `x` with 17 significant digits; `nan`, `inf` and `-inf` for non-finite values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// `true`, `false`, or `na` for checks that were not run.
pub fn verdict(v: Option<bool>) -> &'static str {
    v.map_or("na", flag)
}

/// An in-memory CSV table written in one piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(header: I) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SCHEMA_LINE}");
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Usage(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        std::fs::write(&path, self.render())
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
    }
}

/// Flattens a phase-space point into CSV columns.
pub trait StateColumns {
    fn columns(&self) -> Vec<f64>;
}

impl StateColumns for f64 {
    fn columns(&self) -> Vec<f64> {
        vec![*self]
    }
}

impl StateColumns for [f64; 2] {
    fn columns(&self) -> Vec<f64> {
        self.to_vec()
    }
}

impl StateColumns for DVector<f64> {
    fn columns(&self) -> Vec<f64> {
        self.iter().copied().collect()
    }
}

impl StateColumns for usize {
    fn columns(&self) -> Vec<f64> {
        vec![*self as f64]
    }
}

/// Column names `prefix0, prefix1, ...`; a single column is just `prefix`.
pub fn state_header(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (0..dim).map(|i| format!("{prefix}{i}")).collect()
    }
}

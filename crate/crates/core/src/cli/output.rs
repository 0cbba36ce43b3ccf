use std::fs;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use crate::{Error, Result};

/// A value rendered into a CSV cell or header line.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    /// Shortest round-trip form, in exponent notation outside [1e-5, 1e16).
    fn cell(&self) -> String {
        let a = self.abs();
        if *self == 0.0 || (1e-5..1e16).contains(&a) || !self.is_finite() {
            format!("{self}")
        } else {
            format!("{self:e}")
        }
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {
        $(impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        })*
    };
}

display_cell!(i8, u8, i64, u64, usize, bool, &str, String);

impl<T: Cell> Cell for Option<T> {
    fn cell(&self) -> String {
        self.as_ref().map_or_else(|| "none".to_string(), Cell::cell)
    }
}

impl<T: Cell> Cell for [T] {
    /// Space-separated, so the list stays inside one header value.
    fn cell(&self) -> String {
        let parts: Vec<String> = self.iter().map(Cell::cell).collect();
        format!("[{}]", parts.join(" "))
    }
}

impl<T: Cell> Cell for Vec<T> {
    fn cell(&self) -> String {
        self.as_slice().cell()
    }
}

/// CSV table preceded by a `#` block of provenance and scalar results.
pub struct Table {
    scalars: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            scalars: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn scalar(&mut self, key: &str, value: impl Cell) -> &mut Self {
        self.scalars.push((key.to_string(), value.cell()));
        self
    }

    pub fn row(&mut self, cells: &[&dyn Cell]) {
        debug_assert_eq!(cells.len(), self.columns.len());
        let line: Vec<String> = cells.iter().map(|c| c.cell()).collect();
        self.rows.push(line.join(","));
    }

    pub fn render(&self, cfg: &RunConfig, seed: u64) -> String {
        let mut out = String::new();
        out.push_str(&format!("# trispin {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# config_sha256: {}\n", cfg.hash()));
        out.push_str(&format!("# master_seed: {seed}\n"));
        out.push_str(&format!("# convention: {}\n", cfg.model.convention.as_str()));
        out.push_str(&format!("# profile: {}\n", cfg.profile.as_str()));
        for (k, v) in &self.scalars {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path, name: &str, cfg: &RunConfig, seed: u64) -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, self.render(cfg, seed)).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    }
}

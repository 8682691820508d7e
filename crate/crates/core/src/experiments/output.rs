//! CSV and metadata writers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a log
//! read back parses to the same bits and reruns produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[idx].parse().ok()).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.render())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta");
    out.with_file_name(name)
}

/// Writes `<out>.meta`: tool version, master seed and the resolved config.
pub fn write_meta(out: &Path, config: &ExperimentConfig, extra: &[(&str, String)]) -> Result<PathBuf> {
    let mut text = String::new();
    let _ = writeln!(text, "# version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# master_seed = {}", config.master_seed);
    for (k, v) in extra {
        let _ = writeln!(text, "# {k} = {v}");
    }
    text.push_str(&config.render());
    let path = meta_path(out);
    write_text(&path, &text)?;
    Ok(path)
}

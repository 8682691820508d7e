//! Optimal-parameter fixture files.
//!
//! Plain text, one angle in radians per line. Lines starting with `#` are
//! comments; the writer puts the template name and the verified expected
//! reward there.

use std::fmt::Write as _;
use std::path::Path;

use crate::ansatz::CircuitTemplate;
use crate::error::{QnpgError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub template: String,
    pub angles: Vec<f64>,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Self> {
        let mut template = String::new();
        let mut angles = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(name) = comment.trim().strip_prefix("template:") {
                    template = name.trim().to_string();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| QnpgError::config(format!("fixture line {}: not a number: {line:?}", lineno + 1)))?;
            if !v.is_finite() {
                return Err(QnpgError::config(format!("fixture line {}: non-finite angle", lineno + 1)));
            }
            angles.push(v);
        }
        if angles.is_empty() {
            return Err(QnpgError::config("fixture contains no angles"));
        }
        Ok(Fixture { template, angles })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| QnpgError::config(format!("cannot read fixture {}: {e}", path.display())))?;
        Fixture::parse(&text)
    }

    /// Checks that the fixture fits `template`.
    pub fn for_template(self, template: &CircuitTemplate) -> Result<Vec<f64>> {
        if !self.template.is_empty() && self.template != template.name() {
            return Err(QnpgError::config(format!(
                "fixture is for {} but the ansatz is {}",
                self.template,
                template.name()
            )));
        }
        template.check_params(&self.angles)?;
        Ok(self.angles)
    }

    pub fn render(&self, expected_reward: f64, tolerance: f64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# template: {}", self.template);
        let _ = writeln!(out, "# exact expected reward: {expected_reward:.12} (required >= {tolerance})");
        let _ = writeln!(out, "# one angle in radians per line");
        for a in &self.angles {
            let _ = writeln!(out, "{a:.17}");
        }
        out
    }
}

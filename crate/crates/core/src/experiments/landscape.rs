//! Exact expected reward over a grid of two parameters.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::output::CsvTable;
use crate::bandit::BanditEnv;
use crate::error::{QnpgError, Result};
use crate::trainer::exact_expected_reward;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// `n` evenly spaced points from `lo` to `hi`, both included.
pub fn linspace_closed(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Evaluates a two-parameter ansatz on `linspace_closed(-pi, pi, r)` squared,
/// with `x = theta[0]` varying slowest.
pub fn run_landscape(config: &ExperimentConfig) -> Result<(Vec<LandscapePoint>, CsvTable)> {
    let template = config.template()?;
    if template.n_params() != 2 {
        return Err(QnpgError::config(format!(
            "landscape needs a 2-parameter ansatz, {} has {}",
            template.name(),
            template.n_params()
        )));
    }
    let env = BanditEnv::new(template.n_qubits(), config.env_rule, config.master_seed)?;
    let axis = linspace_closed(-std::f64::consts::PI, std::f64::consts::PI, config.resolution);
    let grid: Vec<(f64, f64)> = axis.iter().flat_map(|&x| axis.iter().map(move |&y| (x, y))).collect();
    let points = grid
        .par_iter()
        .map(|&(x, y)| {
            let z = exact_expected_reward(&template, &env, &[x, y], None)?;
            Ok(LandscapePoint { x, y, z })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = CsvTable::new(["x", "y", "z"]);
    for p in &points {
        table.push(vec![p.x.to_string(), p.y.to_string(), p.z.to_string()]);
    }
    Ok((points, table))
}

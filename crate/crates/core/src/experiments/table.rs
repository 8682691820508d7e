//! Share of states whose optimal action clears a probability threshold.

use rayon::prelude::*;

use super::output::CsvTable;
use crate::ansatz::CircuitTemplate;
use crate::bandit::BanditEnv;
use crate::error::Result;
use crate::policy::exact_policy;

pub const THRESHOLDS: [f64; 7] = [0.95, 0.85, 0.75, 0.65, 0.55, 0.45, 0.35];

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    pub thresholds: Vec<f64>,
    /// Percentage of states with `pi(a_opt|s) >= threshold`.
    pub percent_at_least: Vec<f64>,
    /// Percentage of states with `pi(a_opt|s) < ` the last threshold.
    pub percent_below_last: f64,
}

impl ThresholdTable {
    pub fn to_csv(&self, label: &str) -> CsvTable {
        let mut header = vec!["parameters".to_string()];
        header.extend(self.thresholds.iter().map(|t| format!(">={t}")));
        header.push(format!("<{}", self.thresholds.last().unwrap_or(&0.0)));
        let mut table = CsvTable::new(header);
        let mut row = vec![label.to_string()];
        row.extend(self.percent_at_least.iter().map(|p| p.to_string()));
        row.push(self.percent_below_last.to_string());
        table.push(row);
        table
    }
}

/// Exact optimal-action probability over all states, bucketed by `thresholds`.
pub fn threshold_table(
    template: &CircuitTemplate,
    env: &BanditEnv,
    theta: &[f64],
    thresholds: &[f64],
) -> Result<ThresholdTable> {
    template.check_params(theta)?;
    let p_opt = (0..env.n_states())
        .into_par_iter()
        .map(|s| Ok(exact_policy(template, s, theta)?.prob(env.optimal_action(s)?)))
        .collect::<Result<Vec<f64>>>()?;
    let n = p_opt.len() as f64;
    let pct = |t: f64| 100.0 * p_opt.iter().filter(|&&p| p >= t).count() as f64 / n;
    let percent_at_least: Vec<f64> = thresholds.iter().map(|&t| pct(t)).collect();
    let percent_below_last = thresholds
        .last()
        .map_or(0.0, |&t| 100.0 * p_opt.iter().filter(|&&p| p < t).count() as f64 / n);
    Ok(ThresholdTable {
        thresholds: thresholds.to_vec(),
        percent_at_least,
        percent_below_last,
    })
}

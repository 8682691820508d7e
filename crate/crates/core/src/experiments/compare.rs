//! Multi-seed agent comparison.

use rayon::prelude::*;

use super::config::{Agent, ExperimentConfig};
use super::derive_seed;
use super::output::CsvTable;
use crate::bandit::BanditEnv;
use crate::error::{QnpgError, Result};
use crate::trainer::{init_params, train, trainer_rng, TrainRecord};

/// One training run.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub agent: Agent,
    pub seed_index: usize,
    pub theta0: Vec<f64>,
    pub records: Vec<TrainRecord>,
}

/// Mean and sample standard deviation of the expected reward per logged
/// episode, across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentCurve {
    pub agent: Agent,
    /// 1-based episode numbers.
    pub episodes: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl AgentCurve {
    pub fn band(&self, i: usize) -> (f64, f64) {
        (
            (self.mean[i] - self.std[i]).clamp(-1.0, 1.0),
            (self.mean[i] + self.std[i]).clamp(-1.0, 1.0),
        )
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean.last().unwrap_or(&f64::NAN)
    }
}

#[derive(Debug, Clone)]
pub struct CompareResult {
    pub runs: Vec<RunLog>,
    pub curves: Vec<AgentCurve>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates the runs of one agent. Runs must share an evaluation cadence.
pub fn aggregate(agent: Agent, runs: &[&RunLog]) -> Result<AgentCurve> {
    let first = runs
        .first()
        .ok_or_else(|| QnpgError::config(format!("no runs for agent {}", agent.name())))?;
    let mut curve = AgentCurve {
        agent,
        episodes: Vec::new(),
        mean: Vec::new(),
        std: Vec::new(),
    };
    for (i, rec) in first.records.iter().enumerate() {
        if rec.expected_reward.is_none() {
            continue;
        }
        let values = runs
            .iter()
            .map(|r| r.records.get(i).and_then(|x| x.expected_reward))
            .collect::<Option<Vec<f64>>>()
            .ok_or(QnpgError::Numeric("runs disagree on evaluated episodes"))?;
        let (m, s) = mean_std(&values);
        curve.episodes.push(rec.episode + 1);
        curve.mean.push(m);
        curve.std.push(s);
    }
    Ok(curve)
}

/// Trains every agent on every seed index, in parallel.
///
/// Seed index `i` gives all agents the same initial parameters; training
/// and environment streams are derived per agent.
pub fn run_compare(config: &ExperimentConfig) -> Result<CompareResult> {
    config.validate()?;
    let template = config.template()?;
    let init = config.init_mode(&template)?;
    let theta0s = (0..config.seeds)
        .map(|i| {
            let mut rng = trainer_rng(derive_seed(config.master_seed, "init", i as u64));
            init_params(&init, &template, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(Agent, usize)> = config
        .agents
        .iter()
        .flat_map(|&a| (0..config.seeds).map(move |i| (a, i)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(agent, i)| {
            let mut tc = agent.configure(&config.trainer, config.metric_mode, config.regularization);
            tc.seed = derive_seed(config.master_seed, agent.name(), i as u64);
            tc.theta0 = Some(theta0s[i].clone());
            let env_seed = derive_seed(config.master_seed, &format!("env/{}", agent.name()), i as u64);
            let mut env = BanditEnv::new(template.n_qubits(), config.env_rule, env_seed)?;
            let records = train(&mut env, &template, &tc)?;
            Ok(RunLog {
                agent,
                seed_index: i,
                theta0: theta0s[i].clone(),
                records,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let curves = config
        .agents
        .iter()
        .map(|&a| {
            let mine: Vec<&RunLog> = runs.iter().filter(|r| r.agent == a).collect();
            aggregate(a, &mine)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareResult { runs, curves })
}

impl CompareResult {
    pub fn curve(&self, agent: Agent) -> Option<&AgentCurve> {
        self.curves.iter().find(|c| c.agent == agent)
    }

    /// `episode,<agent>,<agent>_var_neg,<agent>_var_pos,...`
    pub fn summary_table(&self) -> CsvTable {
        let mut header = vec!["episode".to_string()];
        for c in &self.curves {
            let n = c.agent.name();
            header.extend([n.to_string(), format!("{n}_var_neg"), format!("{n}_var_pos")]);
        }
        let mut table = CsvTable::new(header);
        let rows = self.curves.first().map_or(0, |c| c.episodes.len());
        for i in 0..rows {
            let mut row = vec![self.curves[0].episodes[i].to_string()];
            for c in &self.curves {
                let (lo, hi) = c.band(i);
                row.extend([c.mean[i].to_string(), lo.to_string(), hi.to_string()]);
            }
            table.push(row);
        }
        table
    }

    /// Every record of every run, for independent re-aggregation.
    pub fn raw_table(&self) -> CsvTable {
        let mut table = CsvTable::new([
            "agent",
            "seed_index",
            "episode",
            "expected_reward",
            "mean_reward",
            "policy_circuits",
            "gradient_circuits",
            "metric_circuits",
            "total_circuits",
            "clip_events",
            "rank_deficient_solves",
        ]);
        for run in &self.runs {
            for r in &run.records {
                table.push(vec![
                    run.agent.name().to_string(),
                    run.seed_index.to_string(),
                    (r.episode + 1).to_string(),
                    r.expected_reward.map_or(String::new(), |v| v.to_string()),
                    r.mean_reward.to_string(),
                    r.circuits.policy_circuits.to_string(),
                    r.circuits.gradient_circuits.to_string(),
                    r.circuits.metric_circuits.to_string(),
                    r.circuits.total.to_string(),
                    r.clip_events.to_string(),
                    r.rank_deficient_solves.to_string(),
                ]);
            }
        }
        table
    }
}

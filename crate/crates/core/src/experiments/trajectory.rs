//! Parameter trajectories from a fixed starting point.

use rayon::prelude::*;

use super::config::{Agent, AnsatzSpec, ExperimentConfig, Theta0};
use super::derive_seed;
use super::output::CsvTable;
use crate::bandit::BanditEnv;
use crate::error::{QnpgError, Result};
use crate::trainer::{exact_expected_reward, train, TrainRecord};

/// Starting points on the 1-qubit landscape `<r> = sin(t1) cos(t0)`.
///
/// `Distorted` sits next to the saddle at `(pi/2, 0)` where the gradient is
/// small; `NearMinimum` sits next to the minimum at `(0, -pi/2)`.
pub fn preset_theta0(spec: AnsatzSpec, theta0: &Theta0) -> Result<Vec<f64>> {
    match (theta0, spec) {
        (Theta0::Explicit(v), _) => Ok(v.clone()),
        (Theta0::Distorted, AnsatzSpec::Bandit1q) => Ok(vec![1.45, 0.05]),
        (Theta0::NearMinimum, AnsatzSpec::Bandit1q) => Ok(vec![0.1, -1.47]),
        _ => Err(QnpgError::config(
            "named theta0 presets exist only for the 1-qubit ansatz; give explicit angles",
        )),
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub theta0: Vec<f64>,
    pub reward0: f64,
    pub runs: Vec<(Agent, Vec<TrainRecord>)>,
}

/// First 1-based episode whose logged expected reward reaches `threshold`.
pub fn first_hit(records: &[TrainRecord], threshold: f64) -> Option<usize> {
    records
        .iter()
        .find(|r| r.expected_reward.is_some_and(|v| v >= threshold))
        .map(|r| r.episode + 1)
}

/// Trains each configured agent from the same `theta0`, logging parameters
/// and expected reward after every episode.
pub fn run_trajectory(config: &ExperimentConfig) -> Result<(TrajectoryResult, CsvTable)> {
    let template = config.template()?;
    let theta0 = preset_theta0(config.ansatz, &config.theta0)?;
    template.check_params(&theta0)?;
    let env0 = BanditEnv::new(template.n_qubits(), config.env_rule, config.master_seed)?;
    let reward0 = exact_expected_reward(&template, &env0, &theta0, None)?;

    let runs = config
        .agents
        .par_iter()
        .map(|&agent| {
            let mut tc = agent.configure(&config.trainer, config.metric_mode, config.regularization);
            tc.seed = derive_seed(config.master_seed, agent.name(), 0);
            tc.theta0 = Some(theta0.clone());
            tc.theta_every = 1;
            tc.eval_every = 1;
            let env_seed = derive_seed(config.master_seed, &format!("env/{}", agent.name()), 0);
            let mut env = BanditEnv::new(template.n_qubits(), config.env_rule, env_seed)?;
            Ok((agent, train(&mut env, &template, &tc)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let p = template.n_params();
    let mut header = vec!["episode".to_string()];
    for (agent, _) in &runs {
        let n = agent.name();
        header.extend((0..p).map(|i| format!("{n}_theta{i}")));
        header.push(n.to_string());
    }
    let mut table = CsvTable::new(header);
    let mut row0 = vec!["0".to_string()];
    for _ in &runs {
        row0.extend(theta0.iter().map(|t| t.to_string()));
        row0.push(reward0.to_string());
    }
    table.push(row0);
    for e in 0..config.trainer.episodes {
        let mut row = vec![(e + 1).to_string()];
        for (_, records) in &runs {
            let r = &records[e];
            let theta = r.theta.as_ref().expect("theta logged every episode");
            row.extend(theta.iter().map(|t| t.to_string()));
            row.push(r.expected_reward.expect("reward logged every episode").to_string());
        }
        table.push(row);
    }
    Ok((TrajectoryResult { theta0, reward0, runs }, table))
}

//! REINFORCE-style training with vanilla and quantum natural policy gradients.
//!
//! One batch: sample `B` single-step trajectories from the current policy,
//! form `d ln pi(a|s)` per trajectory, optionally precondition it with the
//! (block-)diagonal Fubini-Study metric at that trajectory's state, weight by
//! the return and ascend along the batch average scaled by the learning rate.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::ansatz::CircuitTemplate;
use crate::bandit::{expected_reward_policy, BanditEnv};
use crate::error::{QnpgError, Result};
use crate::metric::{circuit_budget, fubini_study, CircuitBudget, GradMethod, MetricMode, MetricTensor};
use crate::policy::{
    exact_policy, log_grad_from_policy_grad, param_shift_grad, sample_action, spsa_grad, Estimator, DEFAULT_CLIP,
    DEFAULT_SHOTS,
};
use crate::solver;

/// Number of states drawn for subset validation.
pub const DEFAULT_EVAL_SUBSET: usize = 256;

/// States at or above this count are evaluated in parallel.
const PARALLEL_EVAL_STATES: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// Every angle uniform in `[-pi, pi)`.
    Uniform,
    /// `center + N(0, sigma)` per coordinate.
    NearOptimal { sigma: f64, center: Vec<f64> },
}

/// Which states enter the logged expected reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    All,
    /// A fixed random subset of this many states, drawn once per run.
    Subset(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub discount: f64,
    pub estimator: Estimator,
    pub grad_method: GradMethod,
    /// `None` trains with vanilla policy gradients.
    pub metric_mode: Option<MetricMode>,
    /// Ridge penalty for the natural solve; zero selects least squares.
    pub xi: f64,
    /// Multiplies the metric before solving (4.0 gives the quantum Fisher information).
    pub metric_scale: f64,
    /// Floor on `pi(a|s)` in the chain rule; `None` makes a zero estimate an error.
    pub clip: Option<f64>,
    pub episodes: usize,
    pub init: InitMode,
    /// Starting point; overrides `init` when set.
    pub theta0: Option<Vec<f64>>,
    pub seed: u64,
    pub eval: EvalMode,
    /// Log the expected reward every this many batches (and after the last one).
    pub eval_every: usize,
    /// Snapshot parameters every this many batches; zero disables snapshots.
    pub theta_every: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            learning_rate: 0.01,
            batch_size: 1,
            discount: 1.0,
            estimator: Estimator::Shots(DEFAULT_SHOTS),
            grad_method: GradMethod::ParamShift,
            metric_mode: None,
            xi: 0.0,
            metric_scale: 1.0,
            clip: Some(DEFAULT_CLIP),
            episodes: 500,
            init: InitMode::Uniform,
            theta0: None,
            seed: 0,
            eval: EvalMode::All,
            eval_every: 1,
            theta_every: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(QnpgError::config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return bad("discount must lie in [0, 1]");
        }
        if self.estimator == Estimator::Shots(0) {
            return bad("shots must be at least 1");
        }
        if let GradMethod::Spsa { samples, c } = self.grad_method {
            if samples == 0 || !(c > 0.0) {
                return bad("SPSA needs samples >= 1 and c > 0");
            }
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return bad("ridge penalty must be non-negative");
        }
        if !(self.metric_scale > 0.0 && self.metric_scale.is_finite()) {
            return bad("metric scale must be positive");
        }
        if let Some(c) = self.clip {
            if !(c > 0.0) {
                return bad("clip floor must be positive");
            }
        }
        if self.eval_every == 0 {
            return bad("eval_every must be at least 1");
        }
        if let EvalMode::Subset(0) = self.eval {
            return bad("evaluation subset must be non-empty");
        }
        if let InitMode::NearOptimal { sigma, .. } = self.init {
            if !(sigma >= 0.0) {
                return bad("init sigma must be non-negative");
            }
        }
        Ok(())
    }

    /// Modeled circuit count of one batch under this configuration.
    pub fn budget(&self, template: &CircuitTemplate) -> Result<CircuitBudget> {
        circuit_budget(
            template.n_qubits(),
            template.n_params(),
            self.batch_size,
            self.grad_method,
            self.metric_mode,
        )
    }
}

/// Single-step episode data.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub episode: usize,
    /// Exact expected reward after this batch's update, when evaluated.
    pub expected_reward: Option<f64>,
    pub mean_reward: f64,
    pub theta: Option<Vec<f64>>,
    pub circuits: CircuitBudget,
    pub clip_events: usize,
    pub rank_deficient_solves: usize,
    pub wall_time: Duration,
}

/// `G_t = sum_{t' >= t} gamma^{t'-t} r_{t'}`.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (t, r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[t] = acc;
    }
    out
}

pub fn init_params<R: Rng + ?Sized>(mode: &InitMode, template: &CircuitTemplate, rng: &mut R) -> Result<Vec<f64>> {
    let p = template.n_params();
    match mode {
        InitMode::Uniform => Ok((0..p).map(|_| rng.random_range(-PI..PI)).collect()),
        InitMode::NearOptimal { sigma, center } => {
            if center.is_empty() {
                return Err(QnpgError::config("near-optimal initialization needs a parameter fixture"));
            }
            if center.len() != p {
                return Err(QnpgError::Dimension {
                    expected: p,
                    actual: center.len(),
                });
            }
            let normal = Normal::new(0.0, *sigma).map_err(|e| QnpgError::config(e.to_string()))?;
            Ok(center.iter().map(|c| c + normal.sample(rng)).collect())
        }
    }
}

/// Exact expected reward of `theta`, over all states or the given subset.
pub fn exact_expected_reward(
    template: &CircuitTemplate,
    env: &BanditEnv,
    theta: &[f64],
    subset: Option<&[usize]>,
) -> Result<f64> {
    let n_eval = subset.map_or(env.n_states(), <[usize]>::len);
    if n_eval < PARALLEL_EVAL_STATES {
        return expected_reward_policy(|s| exact_policy(template, s, theta), env, subset);
    }
    // Evaluate in parallel, then sum in state order so the result does not
    // depend on the thread count.
    let states: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..env.n_states()).collect(),
    };
    let policies = states
        .par_iter()
        .map(|&s| exact_policy(template, s, theta))
        .collect::<Result<Vec<_>>>()?;
    let mut it = policies.into_iter();
    expected_reward_policy(|_| Ok(it.next().expect("one policy per state")), env, Some(&states))
}

struct Batch {
    theta: Vec<f64>,
    record: TrainRecord,
}

fn run_batch<R: Rng + ?Sized>(
    theta: &[f64],
    env: &mut BanditEnv,
    template: &CircuitTemplate,
    config: &TrainerConfig,
    metric: Option<MetricMode>,
    rng: &mut R,
) -> Result<Batch> {
    config.validate()?;
    template.check_params(theta)?;
    if env.n_qubits() != template.n_qubits() {
        return Err(QnpgError::config(format!(
            "environment has {} qubits but the ansatz has {}",
            env.n_qubits(),
            template.n_qubits()
        )));
    }
    let start = Instant::now();
    let p = theta.len();
    let horizon = 1usize;
    let mut direction = vec![0.0; p];
    let mut budget = CircuitBudget::default();
    let mut clip_events = 0;
    let mut rank_deficient = 0;
    let mut reward_sum = 0.0;
    let layer_circuits = p / template.n_qubits();

    for _ in 0..config.batch_size {
        let state = env.sample_state();
        let (action, policy) = sample_action(template, state, theta, config.estimator, rng)?;
        let reward = env.step(state, action)?;
        reward_sum += reward;
        let traj = Trajectory {
            states: vec![state],
            actions: vec![action],
            rewards: vec![reward],
        };
        let returns = discounted_returns(&traj.rewards, config.discount);

        for t in 0..horizon {
            let (s, a) = (traj.states[t], traj.actions[t]);
            let grad = match config.grad_method {
                GradMethod::ParamShift => param_shift_grad(template, s, theta, a, config.estimator, rng)?,
                GradMethod::Spsa { samples, c } => spsa_grad(template, s, theta, a, samples, c, config.estimator, rng)?,
            };
            let log_grad = log_grad_from_policy_grad(&grad, policy.prob(a), a, config.clip)?;
            clip_events += usize::from(log_grad.clipped);
            let mut step = CircuitBudget::new(1, grad.circuits, 0);

            let eta = match metric {
                None => log_grad.values,
                Some(mode) => {
                    let g = match mode.tensor_mode() {
                        None => MetricTensor::identity(p),
                        Some(tm) => {
                            step.metric_circuits = layer_circuits;
                            fubini_study(template, s, theta, tm)?.scaled(config.metric_scale)
                        }
                    };
                    let update = solver::solve(&g, &log_grad.values, config.xi)?;
                    rank_deficient += usize::from(update.rank_deficient);
                    update.eta
                }
            };
            budget = budget + CircuitBudget::new(step.policy_circuits, step.gradient_circuits, step.metric_circuits);
            for (d, e) in direction.iter_mut().zip(&eta) {
                *d += e * returns[t];
            }
        }
    }

    let scale = config.learning_rate / (config.batch_size * horizon) as f64;
    let next: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t + scale * d).collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(QnpgError::Numeric("parameter update"));
    }
    Ok(Batch {
        theta: next,
        record: TrainRecord {
            episode: 0,
            expected_reward: None,
            mean_reward: reward_sum / config.batch_size as f64,
            theta: None,
            circuits: budget,
            clip_events,
            rank_deficient_solves: rank_deficient,
            wall_time: start.elapsed(),
        },
    })
}

/// One quantum natural policy gradient batch. Requires `config.metric_mode`.
pub fn qnpg_step<R: Rng + ?Sized>(
    theta: &[f64],
    env: &mut BanditEnv,
    template: &CircuitTemplate,
    config: &TrainerConfig,
    rng: &mut R,
) -> Result<(Vec<f64>, TrainRecord)> {
    let mode = config
        .metric_mode
        .ok_or_else(|| QnpgError::config("natural gradient step needs a metric mode"))?;
    let b = run_batch(theta, env, template, config, Some(mode), rng)?;
    Ok((b.theta, b.record))
}

/// One vanilla policy gradient batch; the metric settings are ignored.
pub fn vanilla_step<R: Rng + ?Sized>(
    theta: &[f64],
    env: &mut BanditEnv,
    template: &CircuitTemplate,
    config: &TrainerConfig,
    rng: &mut R,
) -> Result<(Vec<f64>, TrainRecord)> {
    let b = run_batch(theta, env, template, config, None, rng)?;
    Ok((b.theta, b.record))
}

/// Trainer-side random stream (shots, actions, SPSA directions, init).
pub fn trainer_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn eval_subset(config: &TrainerConfig, n_states: usize) -> Option<Vec<usize>> {
    match config.eval {
        EvalMode::All => None,
        EvalMode::Subset(k) if k >= n_states => None,
        EvalMode::Subset(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(1);
            Some(rand::seq::index::sample(&mut rng, n_states, k).into_vec())
        }
    }
}

/// Trains for `config.episodes` batches and returns one record per batch.
pub fn train(env: &mut BanditEnv, template: &CircuitTemplate, config: &TrainerConfig) -> Result<Vec<TrainRecord>> {
    config.validate()?;
    let mut rng = trainer_rng(config.seed);
    let mut theta = match &config.theta0 {
        Some(t) => {
            template.check_params(t)?;
            t.clone()
        }
        None => init_params(&config.init, template, &mut rng)?,
    };
    let subset = eval_subset(config, env.n_states());
    let mut records = Vec::with_capacity(config.episodes);
    for episode in 0..config.episodes {
        let (next, mut record) = match config.metric_mode {
            Some(_) => qnpg_step(&theta, env, template, config, &mut rng),
            None => vanilla_step(&theta, env, template, config, &mut rng),
        }
        .map_err(|e| e.in_episode(episode))?;
        theta = next;
        record.episode = episode;
        let last = episode + 1 == config.episodes;
        if (episode + 1) % config.eval_every == 0 || last {
            record.expected_reward = Some(
                exact_expected_reward(template, env, &theta, subset.as_deref()).map_err(|e| e.in_episode(episode))?,
            );
        }
        if config.theta_every > 0 && ((episode + 1) % config.theta_every == 0 || last) {
            record.theta = Some(theta.clone());
        }
        records.push(record);
    }
    Ok(records)
}

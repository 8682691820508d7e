//! Contextual-bandit environments with Gaussian rewards.
//!
//! States are `0..2^n`, actions are `{0, 1}`. The optimal action yields a
//! reward drawn from `N(+1, sigma)`, the other from `N(-1, sigma)`. Gaussian
//! draws use the ziggurat sampler of `rand_distr` on a ChaCha8 stream, so a
//! seed fixes the reward sequence on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QnpgError, Result};
use crate::policy::PolicyDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalRule {
    /// The same action is optimal in every state.
    Constant(usize),
    /// The optimal action is the XOR of the state's binary digits.
    Parity,
}

#[derive(Debug, Clone)]
pub struct BanditEnv {
    n_qubits: usize,
    rule: OptimalRule,
    reward_sigma: f64,
    rng: ChaCha8Rng,
}

/// One single-step episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
}

impl BanditEnv {
    pub fn new(n_qubits: usize, rule: OptimalRule, seed: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::statevec::MAX_QUBITS {
            return Err(QnpgError::config(format!("bandit needs 1..=16 qubits, got {n_qubits}")));
        }
        if let OptimalRule::Constant(a) = rule {
            if a > 1 {
                return Err(QnpgError::Domain { what: "action", value: a });
            }
        }
        Ok(BanditEnv {
            n_qubits,
            rule,
            reward_sigma: 1.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn with_reward_sigma(mut self, sigma: f64) -> Self {
        self.reward_sigma = sigma;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_states(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn rule(&self) -> OptimalRule {
        self.rule
    }

    pub fn sample_state(&mut self) -> usize {
        self.rng.random_range(0..self.n_states())
    }

    pub fn optimal_action(&self, state: usize) -> Result<usize> {
        if state >= self.n_states() {
            return Err(QnpgError::Domain {
                what: "environment state",
                value: state,
            });
        }
        Ok(match self.rule {
            OptimalRule::Constant(a) => a,
            OptimalRule::Parity => (state.count_ones() & 1) as usize,
        })
    }

    pub fn step(&mut self, state: usize, action: usize) -> Result<f64> {
        let best = self.optimal_action(state)?;
        if action > 1 {
            return Err(QnpgError::Domain { what: "action", value: action });
        }
        let mean = if action == best { 1.0 } else { -1.0 };
        let z: f64 = StandardNormal.sample(&mut self.rng);
        Ok(mean + self.reward_sigma * z)
    }
}

/// `pi(a_opt|s) - pi(not a_opt|s)`.
pub fn expected_reward_state(policy: &PolicyDistribution, env: &BanditEnv, state: usize) -> Result<f64> {
    let best = env.optimal_action(state)?;
    Ok(policy.prob(best) - policy.prob(1 - best))
}

/// Uniform average of [`expected_reward_state`] over every state, or over
/// `subset` when given.
pub fn expected_reward_policy<F>(mut policy_fn: F, env: &BanditEnv, subset: Option<&[usize]>) -> Result<f64>
where
    F: FnMut(usize) -> Result<PolicyDistribution>,
{
    let mut total = 0.0;
    let mut count = 0usize;
    let mut visit = |s: usize| -> Result<()> {
        total += expected_reward_state(&policy_fn(s)?, env, s)?;
        count += 1;
        Ok(())
    };
    match subset {
        Some([]) => return Err(QnpgError::config("evaluation subset is empty")),
        Some(states) => states.iter().try_for_each(|&s| visit(s))?,
        None => (0..env.n_states()).try_for_each(&mut visit)?,
    }
    Ok(total / count as f64)
}

//! Quantum natural policy gradients on contextual bandits.
//!
//! A small dense statevector simulator drives variational policies whose
//! actions are the parity of measured bitstrings. Training compares plain
//! REINFORCE updates with updates preconditioned by the (block-)diagonal
//! Fubini-Study metric of the circuit.

pub mod ansatz;
pub mod bandit;
pub mod error;
pub mod experiments;
pub mod fixture;
pub mod metric;
pub mod policy;
pub mod solver;
pub mod statevec;
pub mod trainer;

pub use ansatz::{parity_optimum, BoundCircuit, CircuitTemplate, EncodingRule, Slot};
pub use bandit::{expected_reward_policy, expected_reward_state, BanditEnv, OptimalRule, Transition};
pub use error::{QnpgError, Result};
pub use fixture::Fixture;
pub use metric::{
    circuit_budget, fubini_study_block_diag, fubini_study_diag, fubini_study_full, CircuitBudget, GradMethod,
    MetricMode, MetricTensor, TensorMode,
};
pub use policy::{
    exact_policy, finite_diff_grad, log_policy_grad, param_shift_grad, sample_action, sampled_policy, spsa_grad,
    Estimator, GradientVector, PolicyDistribution,
};
pub use solver::{solve_least_squares, solve_ridge, NaturalUpdate};
pub use statevec::{BitString, Gate, Pauli, StateVector};
pub use metric::fubini_study;
pub use experiments::{derive_seed, Agent, ExperimentConfig, ExperimentKind};
pub use trainer::{
    discounted_returns, exact_expected_reward, init_params, qnpg_step, train, vanilla_step, EvalMode, InitMode,
    TrainRecord, TrainerConfig,
};

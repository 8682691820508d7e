//! Python bindings.
//!
//! ```python
//! import qnpg
//! ansatz = qnpg.Ansatz.parity(4)
//! theta = qnpg.parity_optimum(4)
//! qnpg.expected_reward(ansatz, theta)          # 1.0
//! qnpg.circuit_budget(12, 36, 10, metric="block_diagonal")["total"]  # 760
//! ```

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qnpg_core::experiments::{threshold_table as table_impl, THRESHOLDS};
use qnpg_core::policy::{estimate_policy, finite_diff_grad as fd_impl};
use qnpg_core::trainer::trainer_rng;
use qnpg_core::{
    circuit_budget as budget_impl, exact_expected_reward, metric, param_shift_grad as ps_impl,
    parity_optimum as optimum_impl, solver, spsa_grad as spsa_impl, train as train_impl, BanditEnv, CircuitTemplate,
    Estimator, GradMethod, MetricMode, MetricTensor, OptimalRule, QnpgError, TrainerConfig,
};

fn to_py(e: QnpgError) -> PyErr {
    match e {
        QnpgError::Config(_)
        | QnpgError::QubitIndex { .. }
        | QnpgError::Dimension { .. }
        | QnpgError::Domain { .. }
        | QnpgError::DegeneratePolicy { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn estimator(shots: Option<usize>) -> Estimator {
    shots.map_or(Estimator::Exact, Estimator::Shots)
}

fn metric_mode(name: Option<&str>) -> PyResult<Option<MetricMode>> {
    match name {
        None | Some("none") => Ok(None),
        Some("identity") => Ok(Some(MetricMode::Identity)),
        Some("diagonal") => Ok(Some(MetricMode::Diagonal)),
        Some("block_diagonal") => Ok(Some(MetricMode::BlockDiagonal)),
        Some(other) => Err(PyValueError::new_err(format!("unknown metric mode {other:?}"))),
    }
}

fn env_rule(name: &str) -> PyResult<OptimalRule> {
    match name {
        "constant0" => Ok(OptimalRule::Constant(0)),
        "constant1" => Ok(OptimalRule::Constant(1)),
        "parity" => Ok(OptimalRule::Parity),
        other => Err(PyValueError::new_err(format!("unknown environment {other:?}"))),
    }
}

fn default_env(ansatz: &Ansatz) -> &'static str {
    if ansatz.inner.name() == "bandit1q" {
        "constant0"
    } else {
        "parity"
    }
}

fn matrix_rows(g: &MetricTensor) -> Vec<Vec<f64>> {
    (0..g.dim()).map(|i| g.matrix.row(i).iter().copied().collect()).collect()
}

fn metric_from_rows(rows: Vec<Vec<f64>>) -> PyResult<MetricTensor> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("metric must be a square list of lists"));
    }
    let mut g = MetricTensor::identity(n);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            g.matrix[(i, j)] = *v;
        }
    }
    Ok(g)
}

/// A parameterized policy circuit.
#[pyclass(frozen)]
struct Ansatz {
    inner: CircuitTemplate,
}

#[pymethods]
impl Ansatz {
    /// Two-parameter single-qubit ansatz.
    #[staticmethod]
    fn bandit1q() -> Self {
        Ansatz {
            inner: CircuitTemplate::bandit1q(),
        }
    }

    /// Three-layer parity ansatz; `entangling=False` keeps only the first layer.
    #[staticmethod]
    #[pyo3(signature = (n_qubits, entangling=true))]
    fn parity(n_qubits: usize, entangling: bool) -> PyResult<Self> {
        Ok(Ansatz {
            inner: CircuitTemplate::parity(n_qubits, entangling).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    #[getter]
    fn layer_map(&self) -> Vec<usize> {
        self.inner.layer_map().to_vec()
    }

    /// Amplitudes of the prepared state as Python complex numbers.
    fn statevector(&self, state: usize, theta: Vec<f64>) -> PyResult<Vec<Complex64>> {
        Ok(self.inner.prepare(state, &theta).map_err(to_py)?.amplitudes().to_vec())
    }

    /// `(pi(0|s), pi(1|s))`, exact or estimated from `shots` samples.
    #[pyo3(signature = (state, theta, shots=None, seed=0))]
    fn policy(&self, state: usize, theta: Vec<f64>, shots: Option<usize>, seed: u64) -> PyResult<(f64, f64)> {
        let mut rng = trainer_rng(seed);
        let p = estimate_policy(&self.inner, state, &theta, estimator(shots), &mut rng).map_err(to_py)?;
        Ok((p.p0(), p.p1()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Ansatz({}, n_qubits={}, n_params={})",
            self.inner.name(),
            self.inner.n_qubits(),
            self.inner.n_params()
        )
    }
}

/// Closed-form optimum of the parity ansatz.
#[pyfunction]
#[pyo3(signature = (n_qubits, entangling=true))]
fn parity_optimum(n_qubits: usize, entangling: bool) -> Vec<f64> {
    optimum_impl(n_qubits, entangling)
}

/// Parameter-shift gradient of `pi(action|state)`.
#[pyfunction]
#[pyo3(signature = (ansatz, state, theta, action, shots=None, seed=0))]
fn param_shift_grad(
    ansatz: &Ansatz,
    state: usize,
    theta: Vec<f64>,
    action: usize,
    shots: Option<usize>,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let mut rng = trainer_rng(seed);
    Ok(ps_impl(&ansatz.inner, state, &theta, action, estimator(shots), &mut rng)
        .map_err(to_py)?
        .values)
}

/// SPSA estimate of the gradient of `pi(action|state)`.
#[pyfunction]
#[pyo3(signature = (ansatz, state, theta, action, samples=10, c=0.1, shots=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn spsa_grad(
    ansatz: &Ansatz,
    state: usize,
    theta: Vec<f64>,
    action: usize,
    samples: usize,
    c: f64,
    shots: Option<usize>,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let mut rng = trainer_rng(seed);
    Ok(spsa_impl(&ansatz.inner, state, &theta, action, samples, c, estimator(shots), &mut rng)
        .map_err(to_py)?
        .values)
}

/// Central finite differences of the exact policy.
#[pyfunction]
#[pyo3(signature = (ansatz, state, theta, action, h=1e-5))]
fn finite_diff_grad(ansatz: &Ansatz, state: usize, theta: Vec<f64>, action: usize, h: f64) -> PyResult<Vec<f64>> {
    Ok(fd_impl(&ansatz.inner, state, &theta, action, h).map_err(to_py)?.values)
}

/// Fubini-Study metric: `mode` is "full", "block_diagonal" or "diagonal".
#[pyfunction]
#[pyo3(signature = (ansatz, state, theta, mode="block_diagonal"))]
fn fubini_study(ansatz: &Ansatz, state: usize, theta: Vec<f64>, mode: &str) -> PyResult<Vec<Vec<f64>>> {
    let g = match mode {
        "full" => metric::fubini_study_full(&ansatz.inner, state, &theta),
        "block_diagonal" => metric::fubini_study_block_diag(&ansatz.inner, state, &theta),
        "diagonal" => metric::fubini_study_diag(&ansatz.inner, state, &theta),
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
    .map_err(to_py)?;
    Ok(matrix_rows(&g))
}

/// Minimum-norm least-squares solve; returns `(eta, rank_deficient)`.
#[pyfunction]
fn solve_least_squares(g: Vec<Vec<f64>>, grad: Vec<f64>) -> PyResult<(Vec<f64>, bool)> {
    let u = solver::solve_least_squares(&metric_from_rows(g)?, &grad).map_err(to_py)?;
    Ok((u.eta, u.rank_deficient))
}

/// Ridge-regularized solve with penalty `xi > 0`.
#[pyfunction]
fn solve_ridge(g: Vec<Vec<f64>>, grad: Vec<f64>, xi: f64) -> PyResult<Vec<f64>> {
    Ok(solver::solve_ridge(&metric_from_rows(g)?, &grad, xi).map_err(to_py)?.eta)
}

/// Circuits per batch, as a dict with policy/gradient/metric/total counts.
#[pyfunction]
#[pyo3(signature = (n_qubits, n_params, batch_size, grad="param_shift", spsa_samples=10, metric=None))]
fn circuit_budget<'py>(
    py: Python<'py>,
    n_qubits: usize,
    n_params: usize,
    batch_size: usize,
    grad: &str,
    spsa_samples: usize,
    metric: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let method = match grad {
        "param_shift" => GradMethod::ParamShift,
        "spsa" => GradMethod::Spsa {
            samples: spsa_samples,
            c: 0.1,
        },
        other => return Err(PyValueError::new_err(format!("unknown gradient method {other:?}"))),
    };
    let b = budget_impl(n_qubits, n_params, batch_size, method, metric_mode(metric)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("policy", b.policy_circuits)?;
    d.set_item("gradient", b.gradient_circuits)?;
    d.set_item("metric", b.metric_circuits)?;
    d.set_item("total", b.total)?;
    Ok(d)
}

/// Exact expected reward averaged over every state.
#[pyfunction]
#[pyo3(signature = (ansatz, theta, env=None))]
fn expected_reward(ansatz: &Ansatz, theta: Vec<f64>, env: Option<&str>) -> PyResult<f64> {
    let rule = env_rule(env.unwrap_or(default_env(ansatz)))?;
    let e = BanditEnv::new(ansatz.inner.n_qubits(), rule, 0).map_err(to_py)?;
    exact_expected_reward(&ansatz.inner, &e, &theta, None).map_err(to_py)
}

/// Percentage of states whose optimal-action probability reaches each threshold.
#[pyfunction]
#[pyo3(signature = (ansatz, theta, env="parity"))]
fn threshold_table<'py>(py: Python<'py>, ansatz: &Ansatz, theta: Vec<f64>, env: &str) -> PyResult<Bound<'py, PyDict>> {
    let e = BanditEnv::new(ansatz.inner.n_qubits(), env_rule(env)?, 0).map_err(to_py)?;
    let t = table_impl(&ansatz.inner, &e, &theta, &THRESHOLDS).map_err(to_py)?;
    let d = PyDict::new(py);
    for (th, p) in t.thresholds.iter().zip(&t.percent_at_least) {
        d.set_item(format!(">={th}"), *p)?;
    }
    d.set_item(format!("<{}", THRESHOLDS[THRESHOLDS.len() - 1]), t.percent_below_last)?;
    Ok(d)
}

/// Trains one agent; returns the per-episode expected reward and final parameters.
#[pyfunction]
#[pyo3(signature = (
    ansatz, episodes=500, learning_rate=0.01, batch_size=1, shots=Some(1024), metric=None,
    xi=0.0, seed=0, theta0=None, env=None
))]
#[allow(clippy::too_many_arguments)]
fn train<'py>(
    py: Python<'py>,
    ansatz: &Ansatz,
    episodes: usize,
    learning_rate: f64,
    batch_size: usize,
    shots: Option<usize>,
    metric: Option<&str>,
    xi: f64,
    seed: u64,
    theta0: Option<Vec<f64>>,
    env: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = TrainerConfig {
        episodes,
        learning_rate,
        batch_size,
        estimator: estimator(shots),
        metric_mode: metric_mode(metric)?,
        xi,
        seed,
        theta0,
        theta_every: episodes.max(1),
        ..TrainerConfig::default()
    };
    let rule = env_rule(env.unwrap_or(default_env(ansatz)))?;
    let template = ansatz.inner.clone();
    let records = py
        .detach(move || {
            let mut e = BanditEnv::new(template.n_qubits(), rule, seed)?;
            train_impl(&mut e, &template, &config)
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    let rewards: Vec<f64> = records.iter().filter_map(|r| r.expected_reward).collect();
    d.set_item("expected_reward", rewards)?;
    d.set_item("theta", records.last().and_then(|r| r.theta.clone()))?;
    d.set_item("circuits", records.iter().map(|r| r.circuits.total).sum::<usize>())?;
    d.set_item("clip_events", records.iter().map(|r| r.clip_events).sum::<usize>())?;
    Ok(d)
}

#[pymodule]
fn qnpg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Ansatz>()?;
    m.add_function(wrap_pyfunction!(parity_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(param_shift_grad, m)?)?;
    m.add_function(wrap_pyfunction!(spsa_grad, m)?)?;
    m.add_function(wrap_pyfunction!(finite_diff_grad, m)?)?;
    m.add_function(wrap_pyfunction!(fubini_study, m)?)?;
    m.add_function(wrap_pyfunction!(solve_least_squares, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ridge, m)?)?;
    m.add_function(wrap_pyfunction!(circuit_budget, m)?)?;
    m.add_function(wrap_pyfunction!(expected_reward, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_table, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

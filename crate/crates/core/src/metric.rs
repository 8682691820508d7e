//! Fubini-Study metric tensor and circuit-cost accounting.
//!
//! `g_ij = Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>]`, with the
//! derivative states formed exactly by inserting `-(i/2) P` right after the
//! rotation `exp(-i t P / 2)` that carries parameter `i`. No factor of four is
//! applied; callers that want quantum Fisher information scale it themselves.

use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ansatz::{BoundCircuit, CircuitTemplate};
use crate::error::{QnpgError, Result};
use crate::statevec::StateVector;

/// Which entries of the metric are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorMode {
    Full,
    BlockDiagonal,
    Diagonal,
}

/// Metric used by the natural-gradient update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    /// `g = I`; reduces the natural update to the vanilla one. No circuits.
    Identity,
    Diagonal,
    BlockDiagonal,
}

impl MetricMode {
    pub fn tensor_mode(self) -> Option<TensorMode> {
        match self {
            MetricMode::Identity => None,
            MetricMode::Diagonal => Some(TensorMode::Diagonal),
            MetricMode::BlockDiagonal => Some(TensorMode::BlockDiagonal),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub matrix: DMatrix<f64>,
    pub mode: TensorMode,
    pub blocks: Vec<Range<usize>>,
}

impl MetricTensor {
    pub fn identity(dim: usize) -> Self {
        MetricTensor {
            matrix: DMatrix::identity(dim, dim),
            mode: TensorMode::Diagonal,
            blocks: (0..dim).map(|k| k..k + 1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.matrix *= factor;
        self
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }
}

/// `|psi>` and `|d_k psi>` for every parameter `k`.
pub fn derivative_states(circuit: &BoundCircuit) -> Result<(StateVector, Vec<StateVector>)> {
    let half_minus_i = Complex64::new(0.0, -0.5);
    let mut psi = StateVector::zero(circuit.n_qubits)?;
    // (first gate still to apply, partial derivative state)
    let mut pending: Vec<Option<(usize, StateVector)>> = vec![None; circuit.sites.len()];
    let mut by_position: Vec<(usize, usize)> = circuit
        .sites
        .iter()
        .enumerate()
        .map(|(k, s)| (s.position, k))
        .collect();
    by_position.sort_unstable();
    let mut next = by_position.iter().peekable();

    for (pos, gate) in circuit.gates.iter().enumerate() {
        psi.apply_gate(gate)?;
        while let Some(&&(p, k)) = next.peek() {
            if p != pos {
                break;
            }
            let site = circuit.sites[k];
            let mut d = psi.clone();
            d.apply_scaled_pauli(site.qubit, site.axis, half_minus_i)?;
            pending[k] = Some((pos + 1, d));
            next.next();
        }
    }

    let derivs = pending
        .into_iter()
        .map(|slot| {
            let (start, mut d) = slot.expect("every parameter has a site");
            d.apply_all(&circuit.gates[start..])?;
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((psi, derivs))
}

fn keep(mode: TensorMode, layer_map: &[usize], i: usize, j: usize) -> bool {
    match mode {
        TensorMode::Full => true,
        TensorMode::BlockDiagonal => layer_map[i] == layer_map[j],
        TensorMode::Diagonal => i == j,
    }
}

pub fn fubini_study(template: &CircuitTemplate, state: usize, theta: &[f64], mode: TensorMode) -> Result<MetricTensor> {
    let circuit = template.bind(state, theta)?;
    let (psi, derivs) = derivative_states(&circuit)?;
    let p = derivs.len();
    let overlaps = derivs
        .iter()
        .map(|d| psi.inner_product(d))
        .collect::<Result<Vec<Complex64>>>()?;
    let layer_map = template.layer_map();
    let mut g = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            if !keep(mode, layer_map, i, j) {
                continue;
            }
            // <d_i|psi><psi|d_j> = conj(<psi|d_i>) <psi|d_j>
            let v = (derivs[i].inner_product(&derivs[j])? - overlaps[i].conj() * overlaps[j]).re;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(QnpgError::Numeric("metric tensor"));
    }
    let blocks = match mode {
        TensorMode::Full => vec![0..p],
        TensorMode::BlockDiagonal => template.layers(),
        TensorMode::Diagonal => (0..p).map(|k| k..k + 1).collect(),
    };
    Ok(MetricTensor { matrix: g, mode, blocks })
}

pub fn fubini_study_full(template: &CircuitTemplate, state: usize, theta: &[f64]) -> Result<MetricTensor> {
    fubini_study(template, state, theta, TensorMode::Full)
}

pub fn fubini_study_block_diag(template: &CircuitTemplate, state: usize, theta: &[f64]) -> Result<MetricTensor> {
    fubini_study(template, state, theta, TensorMode::BlockDiagonal)
}

pub fn fubini_study_diag(template: &CircuitTemplate, state: usize, theta: &[f64]) -> Result<MetricTensor> {
    fubini_study(template, state, theta, TensorMode::Diagonal)
}

/// First-order gradient estimator and its configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradMethod {
    ParamShift,
    Spsa { samples: usize, c: f64 },
}

/// Circuits executed per batch, split by purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CircuitBudget {
    pub policy_circuits: usize,
    pub gradient_circuits: usize,
    pub metric_circuits: usize,
    pub total: usize,
}

impl CircuitBudget {
    pub fn new(policy_circuits: usize, gradient_circuits: usize, metric_circuits: usize) -> Self {
        CircuitBudget {
            policy_circuits,
            gradient_circuits,
            metric_circuits,
            total: policy_circuits + gradient_circuits + metric_circuits,
        }
    }
}

impl std::ops::Add for CircuitBudget {
    type Output = CircuitBudget;

    fn add(self, rhs: CircuitBudget) -> CircuitBudget {
        CircuitBudget::new(
            self.policy_circuits + rhs.policy_circuits,
            self.gradient_circuits + rhs.gradient_circuits,
            self.metric_circuits + rhs.metric_circuits,
        )
    }
}

/// Cost model for one batch. A (block-)diagonal metric of a layered ansatz
/// needs one circuit per rotation layer, i.e. `n_params / n_qubits`.
pub fn circuit_budget(
    n_qubits: usize,
    n_params: usize,
    batch_size: usize,
    grad: GradMethod,
    metric: Option<MetricMode>,
) -> Result<CircuitBudget> {
    let per_gradient = match grad {
        GradMethod::ParamShift => 2 * n_params,
        GradMethod::Spsa { samples, .. } => 2 * samples,
    };
    let per_metric = match metric {
        None | Some(MetricMode::Identity) => 0,
        Some(MetricMode::Diagonal | MetricMode::BlockDiagonal) => {
            if n_qubits == 0 || n_params % n_qubits != 0 {
                return Err(QnpgError::config(format!(
                    "{n_params} parameters do not form whole layers on {n_qubits} qubits"
                )));
            }
            n_params / n_qubits
        }
    };
    Ok(CircuitBudget::new(
        batch_size,
        batch_size * per_gradient,
        batch_size * per_metric,
    ))
}

//! Independent reference implementations used as test oracles.
//!
//! The dense simulator builds each gate as a full `2^n x 2^n` matrix from
//! Kronecker products (qubit 0 is the leftmost factor) and never touches the
//! crate's gate kernels. Encoding angles are re-derived here from the
//! digit rules rather than read back from bound circuits.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qnpg_core::{CircuitTemplate, EncodingRule, Gate, Pauli, Slot};

const O: Complex64 = Complex64::new(0.0, 0.0);
const L: Complex64 = Complex64::new(1.0, 0.0);

pub fn pauli(p: Pauli) -> DMatrix<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::X => DMatrix::from_row_slice(2, 2, &[O, L, L, O]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[O, -i, i, O]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[L, O, O, -L]),
    }
}

/// `exp(-i t P / 2) = cos(t/2) I - i sin(t/2) P`.
pub fn rotation(p: Pauli, t: f64) -> DMatrix<Complex64> {
    let c = Complex64::new((t / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(t / 2.0).sin());
    DMatrix::identity(2, 2).map(|v: Complex64| v * c) + pauli(p).map(|v| v * s)
}

pub fn embed(n: usize, q: usize, u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, L);
    for k in 0..n {
        let f = if k == q { u.clone() } else { DMatrix::identity(2, 2) };
        m = m.kronecker(&f);
    }
    m
}

pub fn cx(n: usize, control: usize, target: usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut m = DMatrix::from_element(dim, dim, O);
    for col in 0..dim {
        let bit = |q: usize| (col >> (n - 1 - q)) & 1;
        let row = if bit(control) == 1 { col ^ (1 << (n - 1 - target)) } else { col };
        m[(row, col)] = L;
    }
    m
}

pub fn gate_matrix(n: usize, g: &Gate) -> DMatrix<Complex64> {
    let h = 1.0 / 2f64.sqrt();
    match *g {
        Gate::H(q) => embed(n, q, &DMatrix::from_row_slice(2, 2, &[L * h, L * h, L * h, -L * h])),
        Gate::Rx(q, t) => embed(n, q, &rotation(Pauli::X, t)),
        Gate::Ry(q, t) => embed(n, q, &rotation(Pauli::Y, t)),
        Gate::Rz(q, t) => embed(n, q, &rotation(Pauli::Z, t)),
        Gate::Phase(q, t) => embed(
            n,
            q,
            &DMatrix::from_row_slice(2, 2, &[L, O, O, Complex64::from_polar(1.0, t)]),
        ),
        Gate::Cx { control, target } => cx(n, control, target),
    }
}

fn digit(n: usize, state: usize, q: usize) -> f64 {
    ((state >> (n - 1 - q)) & 1) as f64
}

/// Gate list of `template` at `(state, theta)`, derived from the slots.
pub fn oracle_gates(template: &CircuitTemplate, state: usize, theta: &[f64]) -> Vec<Gate> {
    let n = template.n_qubits();
    template
        .slots()
        .iter()
        .map(|slot| match *slot {
            Slot::Fixed(g) => g,
            Slot::Encoding { qubit, rule } => {
                let d = digit(n, state, qubit);
                match rule {
                    EncodingRule::ZRotation => Gate::Rz(qubit, (2.0 * d - 1.0) * FRAC_PI_2),
                    EncodingRule::PhaseY => Gate::Phase(qubit, (1.0 - 2.0 * d) * FRAC_PI_2),
                }
            }
            Slot::Param { qubit, axis, index } => Gate::rotation(axis, qubit, theta[index]),
        })
        .collect()
}

pub fn oracle_state(template: &CircuitTemplate, state: usize, theta: &[f64]) -> DVector<Complex64> {
    let n = template.n_qubits();
    let mut psi = DVector::from_element(1 << n, O);
    psi[0] = L;
    for g in oracle_gates(template, state, theta) {
        psi = gate_matrix(n, &g) * psi;
    }
    psi
}

/// `pi(1|s)`: probability of odd-parity bitstrings.
pub fn oracle_p1(template: &CircuitTemplate, state: usize, theta: &[f64]) -> f64 {
    let psi = oracle_state(template, state, theta);
    psi.iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() % 2 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

pub fn oracle_prob(template: &CircuitTemplate, state: usize, theta: &[f64], action: usize) -> f64 {
    let p1 = oracle_p1(template, state, theta);
    if action == 1 {
        p1
    } else {
        1.0 - p1
    }
}

/// Full Fubini-Study tensor from central differences of the dense state.
pub fn oracle_metric(template: &CircuitTemplate, state: usize, theta: &[f64], h: f64) -> DMatrix<f64> {
    let p = theta.len();
    let psi = oracle_state(template, state, theta);
    let d: Vec<DVector<Complex64>> = (0..p)
        .map(|k| {
            let mut tp = theta.to_vec();
            let mut tm = theta.to_vec();
            tp[k] += h;
            tm[k] -= h;
            (oracle_state(template, state, &tp) - oracle_state(template, state, &tm)).map(|v| v / (2.0 * h))
        })
        .collect();
    DMatrix::from_fn(p, p, |i, j| {
        let a = d[i].dotc(&d[j]);
        let b = d[i].dotc(&psi) * psi.dotc(&d[j]);
        (a - b).re
    })
}

/// Ridge solution from the normal equations `(g^T g + xi I) eta = g^T b`.
pub fn oracle_ridge(g: &DMatrix<f64>, b: &[f64], xi: f64) -> Vec<f64> {
    let n = g.ncols();
    let lhs = g.transpose() * g + DMatrix::identity(n, n) * xi;
    let rhs = g.transpose() * DVector::from_column_slice(b);
    lhs.lu().solve(&rhs).expect("ridge normal equations are SPD").iter().copied().collect()
}

pub fn random_theta(rng: &mut impl rand::Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

//! Parameterized circuit families.
//!
//! Two families are provided:
//!
//! * [`CircuitTemplate::bandit1q`]: a single qubit with the state encoded twice,
//!   `H . RZ(phi_s) . RX(t0) . RZ(phi_s) . RY(t1)` with `phi_s = (2s - 1) pi/2`.
//! * [`CircuitTemplate::parity`]: `n` qubits, each prepared in `|R>` (digit 0)
//!   or `|L>` (digit 1) by `H` followed by `P((1 - 2 s_i) pi/2)`, then three
//!   rotation layers (RX, RY, RY) separated by two circular CX layers.
//!
//! Environment state `s` is read big-endian: qubit 0 encodes the most
//! significant of the `n` binary digits.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Range;

use crate::error::{QnpgError, Result};
use crate::statevec::{Gate, Pauli, StateVector};

/// How a binary digit of the environment state becomes a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingRule {
    /// `RZ((2 d - 1) pi/2)`
    ZRotation,
    /// `P((1 - 2 d) pi/2)`; after `H` this gives `|R>` for 0 and `|L>` for 1.
    PhaseY,
}

impl EncodingRule {
    fn gate(self, qubit: usize, digit: u8) -> Gate {
        let d = f64::from(digit);
        match self {
            EncodingRule::ZRotation => Gate::Rz(qubit, (2.0 * d - 1.0) * FRAC_PI_2),
            EncodingRule::PhaseY => Gate::Phase(qubit, (1.0 - 2.0 * d) * FRAC_PI_2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Fixed(Gate),
    Encoding { qubit: usize, rule: EncodingRule },
    Param { qubit: usize, axis: Pauli, index: usize },
}

/// Where parameter `k` ended up in a bound gate list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSite {
    pub position: usize,
    pub qubit: usize,
    pub axis: Pauli,
}

/// A template with state and parameters substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCircuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// Indexed by parameter.
    pub sites: Vec<ParamSite>,
}

impl BoundCircuit {
    pub fn run(&self) -> Result<StateVector> {
        let mut psi = StateVector::zero(self.n_qubits)?;
        psi.apply_all(&self.gates)?;
        Ok(psi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTemplate {
    name: String,
    n_qubits: usize,
    slots: Vec<Slot>,
    layer_map: Vec<usize>,
}

impl CircuitTemplate {
    fn new(name: String, n_qubits: usize, slots: Vec<Slot>, layer_map: Vec<usize>) -> Self {
        debug_assert!({
            let mut seen = vec![false; layer_map.len()];
            slots.iter().all(|s| match *s {
                Slot::Param { index, .. } => !std::mem::replace(&mut seen[index], true),
                _ => true,
            }) && seen.iter().all(|&x| x)
        });
        debug_assert!(layer_map.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
        CircuitTemplate {
            name,
            n_qubits,
            slots,
            layer_map,
        }
    }

    /// A user-defined circuit. Parameter indices must cover `0..layer_map.len()`
    /// exactly once and layers must be numbered consecutively from zero.
    pub fn from_slots(name: &str, n_qubits: usize, slots: Vec<Slot>, layer_map: Vec<usize>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::statevec::MAX_QUBITS {
            return Err(QnpgError::config(format!("circuit needs 1..=16 qubits, got {n_qubits}")));
        }
        let mut seen = vec![false; layer_map.len()];
        for slot in &slots {
            let q = match *slot {
                Slot::Fixed(ref g) => match *g {
                    Gate::Cx { control, target } => control.max(target),
                    ref g => g.target(),
                },
                Slot::Encoding { qubit, .. } => qubit,
                Slot::Param { qubit, index, .. } => {
                    if index >= seen.len() || std::mem::replace(&mut seen[index], true) {
                        return Err(QnpgError::config(format!("parameter index {index} is missing from the layer map or repeated")));
                    }
                    qubit
                }
            };
            if q >= n_qubits {
                return Err(QnpgError::QubitIndex { index: q, n_qubits });
            }
        }
        if !seen.iter().all(|&x| x) {
            return Err(QnpgError::config("every parameter index needs a slot"));
        }
        if layer_map.first().is_some_and(|&l| l != 0) || !layer_map.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1) {
            return Err(QnpgError::config("layer indices must start at 0 and never skip"));
        }
        Ok(CircuitTemplate::new(name.to_string(), n_qubits, slots, layer_map))
    }

    /// Single-qubit ansatz with two trainable angles and repeated encoding.
    pub fn bandit1q() -> Self {
        let rule = EncodingRule::ZRotation;
        let slots = vec![
            Slot::Fixed(Gate::H(0)),
            Slot::Encoding { qubit: 0, rule },
            Slot::Param {
                qubit: 0,
                axis: Pauli::X,
                index: 0,
            },
            Slot::Encoding { qubit: 0, rule },
            Slot::Param {
                qubit: 0,
                axis: Pauli::Y,
                index: 1,
            },
        ];
        CircuitTemplate::new("bandit1q".into(), 1, slots, vec![0, 1])
    }

    /// Layered parity ansatz on an even number of qubits with `3 n` parameters.
    pub fn parity(n_qubits: usize, entangling: bool) -> Result<Self> {
        if n_qubits < 2 || n_qubits % 2 != 0 || n_qubits > crate::statevec::MAX_QUBITS {
            return Err(QnpgError::config(format!(
                "parity ansatz needs an even qubit count in 2..=16, got {n_qubits}"
            )));
        }
        let n = n_qubits;
        let mut slots = Vec::with_capacity(9 * n);
        for q in 0..n {
            slots.push(Slot::Fixed(Gate::H(q)));
            slots.push(Slot::Encoding {
                qubit: q,
                rule: EncodingRule::PhaseY,
            });
        }
        let layer = |slots: &mut Vec<Slot>, l: usize, axis: Pauli| {
            for q in 0..n {
                slots.push(Slot::Param {
                    qubit: q,
                    axis,
                    index: l * n + q,
                });
            }
        };
        let entangle = |slots: &mut Vec<Slot>, first_control: usize| {
            for control in (first_control..n).step_by(2) {
                slots.push(Slot::Fixed(Gate::Cx {
                    control,
                    target: (control + 1) % n,
                }));
            }
        };
        layer(&mut slots, 0, Pauli::X);
        if entangling {
            entangle(&mut slots, 0);
        }
        layer(&mut slots, 1, Pauli::Y);
        if entangling {
            entangle(&mut slots, 1);
        }
        layer(&mut slots, 2, Pauli::Y);

        let layer_map = (0..3 * n).map(|k| k / n).collect();
        let name = if entangling {
            format!("parity{n}")
        } else {
            format!("parity{n}_product")
        };
        Ok(CircuitTemplate::new(name, n, slots, layer_map))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.layer_map.len()
    }

    /// Number of environment states the encoding accepts, `2^n`.
    pub fn n_states(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn layer_map(&self) -> &[usize] {
        &self.layer_map
    }

    /// Parameter index ranges of the rotation layers, in order.
    pub fn layers(&self) -> Vec<Range<usize>> {
        let mut out: Vec<Range<usize>> = Vec::new();
        for (k, &l) in self.layer_map.iter().enumerate() {
            match out.last_mut() {
                Some(r) if self.layer_map[r.start] == l => r.end = k + 1,
                _ => out.push(k..k + 1),
            }
        }
        out
    }

    pub fn cx_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, Slot::Fixed(Gate::Cx { .. })))
            .count()
    }

    /// Binary digit of `state` fed to `qubit`.
    pub fn digit(&self, state: usize, qubit: usize) -> u8 {
        ((state >> (self.n_qubits - 1 - qubit)) & 1) as u8
    }

    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(QnpgError::Dimension {
                expected: self.n_params(),
                actual: theta.len(),
            });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(QnpgError::Numeric("parameter vector"));
        }
        Ok(())
    }

    pub fn bind(&self, state: usize, theta: &[f64]) -> Result<BoundCircuit> {
        self.check_params(theta)?;
        if state >= self.n_states() {
            return Err(QnpgError::Domain {
                what: "environment state",
                value: state,
            });
        }
        let mut gates = Vec::with_capacity(self.slots.len());
        let mut sites = vec![
            ParamSite {
                position: 0,
                qubit: 0,
                axis: Pauli::X
            };
            self.n_params()
        ];
        for slot in &self.slots {
            match *slot {
                Slot::Fixed(g) => gates.push(g),
                Slot::Encoding { qubit, rule } => gates.push(rule.gate(qubit, self.digit(state, qubit))),
                Slot::Param { qubit, axis, index } => {
                    sites[index] = ParamSite {
                        position: gates.len(),
                        qubit,
                        axis,
                    };
                    gates.push(Gate::rotation(axis, qubit, theta[index]));
                }
            }
        }
        Ok(BoundCircuit {
            n_qubits: self.n_qubits,
            gates,
            sites,
        })
    }

    /// Output state `|psi(s, theta)>`.
    pub fn prepare(&self, state: usize, theta: &[f64]) -> Result<StateVector> {
        self.bind(state, theta)?.run()
    }
}

/// Closed-form parameters at which the parity ansatz measures `XOR_i s_i`
/// deterministically for every state.
///
/// The first layer turns `|R>`/`|L>` into `|0>`/`|1>`. Without entanglement
/// the remaining layers are idle. With entanglement, a quarter turn about Y
/// on the odd qubits between the CX layers and on every qubit at the end
/// undoes the parity scrambling of the circular CX ladder.
pub fn parity_optimum(n_qubits: usize, entangling: bool) -> Vec<f64> {
    let n = n_qubits;
    let mut theta = vec![0.0; 3 * n];
    theta[..n].fill(FRAC_PI_2);
    if entangling {
        for q in (1..n).step_by(2) {
            theta[n + q] = FRAC_PI_2;
        }
        theta[2 * n..].fill(FRAC_PI_2);
    }
    theta
}

/// Wraps every angle into `[-pi, pi)`.
pub fn wrap_angles(theta: &mut [f64]) {
    for t in theta {
        *t = (*t + PI).rem_euclid(2.0 * PI) - PI;
    }
}

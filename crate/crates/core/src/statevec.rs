//! Dense statevector simulation.
//!
//! Qubit 0 is the most significant bit of the basis-state index: on three
//! qubits the basis state `|q0 q1 q2> = |110>` has index 6. Rotations follow
//! `R_A(t) = exp(-i t A / 2)` and the phase gate is `diag(1, e^{i t})`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{QnpgError, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 16;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Single-qubit Pauli operator, used as the generator of the rotation gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> [Complex64; 4] {
        match self {
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    /// `diag(1, e^{i angle})`
    Phase(usize, f64),
    Cx { control: usize, target: usize },
}

impl Gate {
    /// Rotation about `axis` by `angle` on `qubit`.
    pub fn rotation(axis: Pauli, qubit: usize, angle: f64) -> Gate {
        match axis {
            Pauli::X => Gate::Rx(qubit, angle),
            Pauli::Y => Gate::Ry(qubit, angle),
            Pauli::Z => Gate::Rz(qubit, angle),
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::Phase(q, _) => q,
            Gate::Cx { target, .. } => target,
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(q),
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Phase(q, t) => Gate::Phase(q, -t),
            cx @ Gate::Cx { .. } => cx,
        }
    }

    /// Row-major 2x2 unitary for single-qubit gates, `None` for CX.
    fn matrix(&self) -> Option<[Complex64; 4]> {
        let m = match *self {
            Gate::H(_) => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [h, h, h, -h]
            }
            Gate::Rx(_, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                let c = Complex64::new(c, 0.0);
                let ms = Complex64::new(0.0, -s);
                [c, ms, ms, c]
            }
            Gate::Ry(_, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ]
            }
            Gate::Rz(_, t) => [
                Complex64::from_polar(1.0, -t / 2.0),
                ZERO,
                ZERO,
                Complex64::from_polar(1.0, t / 2.0),
            ],
            Gate::Phase(_, t) => [ONE, ZERO, ZERO, Complex64::from_polar(1.0, t)],
            Gate::Cx { .. } => return None,
        };
        Some(m)
    }
}

/// Measured computational-basis outcome. Digit `i` is the outcome of qubit `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    index: usize,
    n_qubits: usize,
}

impl BitString {
    pub fn new(index: usize, n_qubits: usize) -> Self {
        BitString { index, n_qubits }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let index = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        BitString {
            index,
            n_qubits: bits.len(),
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn bit(&self, qubit: usize) -> u8 {
        ((self.index >> (self.n_qubits - 1 - qubit)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.n_qubits).map(|q| self.bit(q)).collect()
    }

    pub fn count_ones(&self) -> u32 {
        self.index.count_ones()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QnpgError::config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() || dim.trailing_zeros() as usize > MAX_QUBITS {
            return Err(QnpgError::config(format!(
                "amplitude count {dim} is not 2^n for 1 <= n <= {MAX_QUBITS}"
            )));
        }
        Ok(StateVector {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n_qubits {
            return Err(QnpgError::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(1 << (self.n_qubits - 1 - qubit))
    }

    fn apply_matrix(&mut self, qubit: usize, m: [Complex64; 4]) -> Result<()> {
        let mask = self.mask(qubit)?;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = m[0] * a + m[1] * b;
                self.amplitudes[j] = m[2] * a + m[3] * b;
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Cx { control, target } => {
                let cmask = self.mask(control)?;
                let tmask = self.mask(target)?;
                if control == target {
                    return Err(QnpgError::config("CX control and target coincide"));
                }
                for i in 0..self.amplitudes.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amplitudes.swap(i, i | tmask);
                    }
                }
                Ok(())
            }
            _ => {
                let m = gate.matrix().expect("single-qubit gate");
                self.apply_matrix(gate.target(), m)
            }
        }
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Applies `factor * P` on `qubit`. Not unitary in general; used to form
    /// derivative states `-(i/2) P |psi>`.
    pub fn apply_scaled_pauli(&mut self, qubit: usize, pauli: Pauli, factor: Complex64) -> Result<()> {
        let m = pauli.matrix().map(|e| e * factor);
        self.apply_matrix(qubit, m)
    }

    /// Born-rule probabilities of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(QnpgError::Dimension {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Draws `shots` independent computational-basis measurements.
    pub fn sample_bitstrings<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<Vec<BitString>> {
        if shots == 0 {
            return Err(QnpgError::config("shots must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.dim());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let last = self.dim() - 1;
        Ok((0..shots)
            .map(|_| {
                let u = rng.random::<f64>() * acc;
                let idx = cumulative.partition_point(|&c| c <= u).min(last);
                BitString::new(idx, self.n_qubits)
            })
            .collect())
    }
}

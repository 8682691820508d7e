//! Parity post-processed policies and their first-order gradients.
//!
//! A measured bitstring `b` selects action `XOR_i b_i`, so
//! `pi(a|s) = sum over b with parity a of |<b|psi(s, theta)>|^2`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::ansatz::CircuitTemplate;
use crate::error::{QnpgError, Result};
use crate::statevec::BitString;

/// Shots used for policy estimation unless configured otherwise.
pub const DEFAULT_SHOTS: usize = 1024;

/// Floor applied to `pi(a|s)` in the log-policy chain rule.
pub const DEFAULT_CLIP: f64 = 1e-6;

/// How expectation values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Exact Born-rule probabilities.
    Exact,
    /// Frequencies over this many independent shots.
    Shots(usize),
}

impl Estimator {
    fn validate(self) -> Result<()> {
        match self {
            Estimator::Shots(0) => Err(QnpgError::config("shots must be at least 1")),
            _ => Ok(()),
        }
    }
}

/// Probabilities of actions 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyDistribution {
    probs: [f64; 2],
}

impl PolicyDistribution {
    /// Distribution with `p(1) = p1`.
    pub fn from_p1(p1: f64) -> Self {
        let p1 = p1.clamp(0.0, 1.0);
        PolicyDistribution {
            probs: [1.0 - p1, p1],
        }
    }

    pub fn uniform() -> Self {
        PolicyDistribution { probs: [0.5, 0.5] }
    }

    pub fn prob(&self, action: usize) -> f64 {
        self.probs[action]
    }

    pub fn p0(&self) -> f64 {
        self.probs[0]
    }

    pub fn p1(&self) -> f64 {
        self.probs[1]
    }

    /// Draws an action from this distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        usize::from(rng.random::<f64>() >= self.probs[0])
    }
}

/// Derivatives with respect to every parameter, plus the number of circuits
/// that were executed to obtain them.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    pub values: Vec<f64>,
    pub circuits: usize,
}

impl GradientVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `d ln pi(a|s)` together with whether the clip floor was hit.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPolicyGradient {
    pub values: Vec<f64>,
    pub circuits: usize,
    pub clipped: bool,
}

pub fn parity(bits: &BitString) -> usize {
    (bits.count_ones() & 1) as usize
}

pub fn exact_policy(template: &CircuitTemplate, state: usize, theta: &[f64]) -> Result<PolicyDistribution> {
    let psi = template.prepare(state, theta)?;
    let p1: f64 = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(b, _)| b.count_ones() & 1 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok(PolicyDistribution::from_p1(p1))
}

pub fn sampled_policy<R: Rng + ?Sized>(
    template: &CircuitTemplate,
    state: usize,
    theta: &[f64],
    shots: usize,
    rng: &mut R,
) -> Result<PolicyDistribution> {
    if shots == 0 {
        return Err(QnpgError::config("shots must be at least 1"));
    }
    let psi = template.prepare(state, theta)?;
    let ones = psi
        .sample_bitstrings(shots, rng)?
        .iter()
        .filter(|b| parity(b) == 1)
        .count();
    Ok(PolicyDistribution::from_p1(ones as f64 / shots as f64))
}

pub fn estimate_policy<R: Rng + ?Sized>(
    template: &CircuitTemplate,
    state: usize,
    theta: &[f64],
    estimator: Estimator,
    rng: &mut R,
) -> Result<PolicyDistribution> {
    match estimator {
        Estimator::Exact => exact_policy(template, state, theta),
        Estimator::Shots(k) => sampled_policy(template, state, theta, k, rng),
    }
}

/// Runs the policy circuit once and draws an action from the resulting
/// estimate. The estimate is returned so the caller can reuse it.
pub fn sample_action<R: Rng + ?Sized>(
    template: &CircuitTemplate,
    state: usize,
    theta: &[f64],
    estimator: Estimator,
    rng: &mut R,
) -> Result<(usize, PolicyDistribution)> {
    estimator.validate()?;
    let policy = estimate_policy(template, state, theta, estimator, rng)?;
    Ok((policy.sample(rng), policy))
}

fn check_action(action: usize) -> Result<()> {
    if action > 1 {
        return Err(QnpgError::Domain {
            what: "action",
            value: action,
        });
    }
    Ok(())
}

/// Parameter-shift gradient of `pi(a|s)`: two circuits per parameter,
/// shifted by `+-pi/2`. In shot mode every shifted circuit gets its own shots.
pub fn param_shift_grad<R: Rng + ?Sized>(
    template: &CircuitTemplate,
    state: usize,
    theta: &[f64],
    action: usize,
    estimator: Estimator,
    rng: &mut R,
) -> Result<GradientVector> {
    check_action(action)?;
    estimator.validate()?;
    template.check_params(theta)?;
    let mut shifted = theta.to_vec();
    let mut values = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        shifted[k] = theta[k] + FRAC_PI_2;
        let plus = estimate_policy(template, state, &shifted, estimator, rng)?.prob(action);
        shifted[k] = theta[k] - FRAC_PI_2;
        let minus = estimate_policy(template, state, &shifted, estimator, rng)?.prob(action);
        shifted[k] = theta[k];
        values.push((plus - minus) / 2.0);
    }
    Ok(GradientVector {
        values,
        circuits: 2 * theta.len(),
    })
}

/// Chain rule `d ln pi = d pi / max(pi, clip)`.
///
/// With `clip = None` a zero probability is an error.
pub fn log_grad_from_policy_grad(
    grad: &GradientVector,
    prob: f64,
    action: usize,
    clip: Option<f64>,
) -> Result<LogPolicyGradient> {
    let (denominator, clipped) = match clip {
        Some(eps) if prob < eps => (eps, true),
        Some(_) => (prob, false),
        None if prob <= 0.0 => return Err(QnpgError::DegeneratePolicy { action }),
        None => (prob, false),
    };
    Ok(LogPolicyGradient {
        values: grad.values.iter().map(|g| g / denominator).collect(),
        circuits: grad.circuits,
        clipped,
    })
}

/// Log-policy gradient via parameter shift, estimating `pi(a|s)` with one
/// additional circuit.
pub fn log_policy_grad<R: Rng + ?Sized>(
    template: &CircuitTemplate,
    state: usize,
    theta: &[f64],
    action: usize,
    estimator: Estimator,
    clip: Option<f64>,
    rng: &mut R,
) -> Result<LogPolicyGradient> {
    let grad = param_shift_grad(template, state, theta, action, estimator, rng)?;
    let prob = estimate_policy(template, state, theta, estimator, rng)?.prob(action);
    let mut out = log_grad_from_policy_grad(&grad, prob, action, clip)?;
    out.circuits += 1;
    Ok(out)
}

/// SPSA estimate of `d pi(a|s)` averaged over `samples` Rademacher directions.
/// Costs `2 * samples` circuits independent of the parameter count.
#[allow(clippy::too_many_arguments)]
pub fn spsa_grad<R: Rng + ?Sized>(
    template: &CircuitTemplate,
    state: usize,
    theta: &[f64],
    action: usize,
    samples: usize,
    c: f64,
    estimator: Estimator,
    rng: &mut R,
) -> Result<GradientVector> {
    check_action(action)?;
    estimator.validate()?;
    template.check_params(theta)?;
    if samples == 0 {
        return Err(QnpgError::config("SPSA needs at least one sample"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(QnpgError::config(format!("SPSA step must be positive, got {c}")));
    }
    let dim = theta.len();
    let mut acc = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    let mut plus = vec![0.0; dim];
    let mut minus = vec![0.0; dim];
    for _ in 0..samples {
        for d in delta.iter_mut() {
            *d = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        for k in 0..dim {
            plus[k] = theta[k] + c * delta[k];
            minus[k] = theta[k] - c * delta[k];
        }
        let fp = estimate_policy(template, state, &plus, estimator, rng)?.prob(action);
        let fm = estimate_policy(template, state, &minus, estimator, rng)?.prob(action);
        let slope = (fp - fm) / (2.0 * c);
        // 1/delta_k == delta_k for +-1 entries
        for k in 0..dim {
            acc[k] += slope * delta[k];
        }
    }
    let n = samples as f64;
    Ok(GradientVector {
        values: acc.into_iter().map(|v| v / n).collect(),
        circuits: 2 * samples,
    })
}

/// Central differences of the exact policy. Test oracle.
pub fn finite_diff_grad(
    template: &CircuitTemplate,
    state: usize,
    theta: &[f64],
    action: usize,
    h: f64,
) -> Result<GradientVector> {
    check_action(action)?;
    if !(h > 0.0) {
        return Err(QnpgError::config("finite-difference step must be positive"));
    }
    template.check_params(theta)?;
    let mut shifted = theta.to_vec();
    let mut values = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        shifted[k] = theta[k] + h;
        let fp = exact_policy(template, state, &shifted)?.prob(action);
        shifted[k] = theta[k] - h;
        let fm = exact_policy(template, state, &shifted)?.prob(action);
        shifted[k] = theta[k];
        values.push((fp - fm) / (2.0 * h));
    }
    Ok(GradientVector {
        values,
        circuits: 2 * theta.len(),
    })
}

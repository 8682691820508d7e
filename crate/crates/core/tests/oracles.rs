//! Simulator, gradient, metric and solver checks against independent oracles.

mod common;

use std::f64::consts::FRAC_PI_2;

use common::*;
use nalgebra::DMatrix;
use qnpg_core::policy::estimate_policy;
use qnpg_core::trainer::trainer_rng;
use qnpg_core::{
    exact_expected_reward, exact_policy, fubini_study_block_diag, fubini_study_full, param_shift_grad,
    parity_optimum, solve_least_squares, solve_ridge, spsa_grad, BanditEnv, CircuitTemplate, Estimator,
    MetricTensor, OptimalRule,
};
use rand::Rng;

fn templates() -> Vec<CircuitTemplate> {
    vec![
        CircuitTemplate::bandit1q(),
        CircuitTemplate::parity(2, true).unwrap(),
        CircuitTemplate::parity(4, true).unwrap(),
        CircuitTemplate::parity(4, false).unwrap(),
    ]
}

#[test]
fn statevector_matches_dense_matrices() {
    let mut rng = trainer_rng(1);
    for t in templates() {
        for _ in 0..10 {
            let s = rng.random_range(0..t.n_states());
            let theta = random_theta(&mut rng, t.n_params());
            let ours = t.prepare(s, &theta).unwrap();
            let oracle = oracle_state(&t, s, &theta);
            for (a, b) in ours.amplitudes().iter().zip(oracle.iter()) {
                assert!((a - b).norm() < 1e-12, "{}: {a} vs {b}", t.name());
            }
        }
    }
}

#[test]
fn bound_gates_match_slot_derivation() {
    let mut rng = trainer_rng(2);
    for t in templates() {
        let s = rng.random_range(0..t.n_states());
        let theta = random_theta(&mut rng, t.n_params());
        assert_eq!(t.bind(s, &theta).unwrap().gates, oracle_gates(&t, s, &theta));
    }
}

#[test]
fn exact_policy_matches_oracle() {
    let mut rng = trainer_rng(3);
    for t in templates() {
        for _ in 0..10 {
            let s = rng.random_range(0..t.n_states());
            let theta = random_theta(&mut rng, t.n_params());
            let p = exact_policy(&t, s, &theta).unwrap();
            assert!((p.p1() - oracle_p1(&t, s, &theta)).abs() < 1e-12);
        }
    }
}

#[test]
fn shot_estimates_are_binomial() {
    let t = CircuitTemplate::parity(2, true).unwrap();
    let theta = vec![0.3, -1.1, 0.7, 2.0, -0.4, 1.3];
    let p1 = oracle_p1(&t, 2, &theta);
    let mut rng = trainer_rng(4);
    let k = 1024.0;
    let sd = (p1 * (1.0 - p1) / k).sqrt();
    let draws: Vec<f64> = (0..400)
        .map(|_| estimate_policy(&t, 2, &theta, Estimator::Shots(1024), &mut rng).unwrap().p1())
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    assert!((mean - p1).abs() < 5.0 * sd / 20.0, "{mean} vs {p1}");
    assert!((var.sqrt() / sd - 1.0).abs() < 0.15);
    // Frequencies are multiples of 1/K.
    assert!(draws.iter().all(|x| ((x * k) - (x * k).round()).abs() < 1e-9));
}

#[test]
fn param_shift_matches_oracle_finite_differences() {
    let mut rng = trainer_rng(5);
    let h = 1e-5;
    for t in templates() {
        for _ in 0..5 {
            let s = rng.random_range(0..t.n_states());
            let a = rng.random_range(0..2);
            let theta = random_theta(&mut rng, t.n_params());
            let g = param_shift_grad(&t, s, &theta, a, Estimator::Exact, &mut rng).unwrap();
            assert_eq!(g.circuits, 2 * t.n_params());
            for k in 0..theta.len() {
                let (mut tp, mut tm) = (theta.clone(), theta.clone());
                tp[k] += h;
                tm[k] -= h;
                let fd = (oracle_prob(&t, s, &tp, a) - oracle_prob(&t, s, &tm, a)) / (2.0 * h);
                assert!((g.values[k] - fd).abs() < 1e-6, "{} k={k}: {} vs {fd}", t.name(), g.values[k]);
            }
        }
    }
}

#[test]
fn spsa_is_consistent_with_the_exact_gradient() {
    // Averaged over many Rademacher directions the SPSA estimate converges
    // to the gradient (up to O(c^2) bias).
    let t = CircuitTemplate::parity(2, true).unwrap();
    let theta = vec![0.4, -0.9, 1.2, 0.1, -0.3, 0.8];
    let mut rng = trainer_rng(6);
    let exact = param_shift_grad(&t, 1, &theta, 0, Estimator::Exact, &mut rng).unwrap();
    let runs = 400;
    let mut acc = vec![0.0; theta.len()];
    for _ in 0..runs {
        let g = spsa_grad(&t, 1, &theta, 0, 10, 1e-3, Estimator::Exact, &mut rng).unwrap();
        assert_eq!(g.circuits, 20);
        for (a, v) in acc.iter_mut().zip(&g.values) {
            *a += v / runs as f64;
        }
    }
    let norm = exact.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let err = acc.iter().zip(&exact.values).map(|(a, e)| (a - e).powi(2)).sum::<f64>().sqrt();
    assert!(err < 0.1 * norm.max(0.1), "err {err}, |g| {norm}");
}

#[test]
fn metric_matches_state_finite_differences() {
    let mut rng = trainer_rng(7);
    for t in templates() {
        for _ in 0..3 {
            let s = rng.random_range(0..t.n_states());
            let theta = random_theta(&mut rng, t.n_params());
            let ours = fubini_study_full(&t, s, &theta).unwrap().matrix;
            let oracle = oracle_metric(&t, s, &theta, 1e-5);
            assert!((ours - oracle).abs().max() < 1e-7, "{}", t.name());
        }
    }
}

#[test]
fn single_ry_on_zero_has_quarter_metric() {
    use qnpg_core::{Pauli, Slot};
    let t = CircuitTemplate::from_slots(
        "ry",
        1,
        vec![Slot::Param {
            qubit: 0,
            axis: Pauli::Y,
            index: 0,
        }],
        vec![0],
    )
    .unwrap();
    for theta in [0.0, 0.7, -2.5] {
        let g = fubini_study_full(&t, 0, &[theta]).unwrap();
        assert!((g.matrix[(0, 0)] - 0.25).abs() < 1e-10);
    }
}

#[test]
fn from_slots_validates() {
    use qnpg_core::{Pauli, Slot};
    let p = |qubit, index| Slot::Param {
        qubit,
        axis: Pauli::X,
        index,
    };
    assert!(CircuitTemplate::from_slots("a", 1, vec![p(0, 0)], vec![0, 0]).is_err());
    assert!(CircuitTemplate::from_slots("a", 1, vec![p(0, 0), p(0, 0)], vec![0, 0]).is_err());
    assert!(CircuitTemplate::from_slots("a", 1, vec![p(1, 0)], vec![0]).is_err());
    assert!(CircuitTemplate::from_slots("a", 1, vec![p(0, 0)], vec![1]).is_err());
    assert!(CircuitTemplate::from_slots("a", 0, vec![], vec![]).is_err());
    assert!(CircuitTemplate::from_slots("a", 2, vec![p(0, 0), p(1, 1)], vec![0, 1]).is_ok());
}

#[test]
fn ridge_matches_normal_equations() {
    let mut rng = trainer_rng(8);
    for n in [2, 5, 9] {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let g = &a * a.transpose();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut m = MetricTensor::identity(n);
        m.matrix = g.clone();
        for xi in [1e-4, 1e-2, 1.0] {
            let ours = solve_ridge(&m, &b, xi).unwrap().eta;
            let oracle = oracle_ridge(&g, &b, xi);
            for (x, y) in ours.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()), "{x} vs {y}");
            }
        }
    }
}

#[test]
fn least_squares_is_minimum_norm_on_rank_deficient_metric() {
    // Rank-1 metric: the solution must lie in the row space.
    let mut m = MetricTensor::identity(3);
    let v = [1.0, 2.0, -1.0];
    m.matrix = DMatrix::from_fn(3, 3, |i, j| v[i] * v[j]);
    let b = [0.5, 1.0, -0.5];
    let u = solve_least_squares(&m, &b).unwrap();
    assert!(u.rank_deficient);
    // eta = (v.b / |v|^4) v
    let vb: f64 = v.iter().zip(&b).map(|(x, y)| x * y).sum();
    let scale = vb / 36.0;
    for (e, vi) in u.eta.iter().zip(&v) {
        assert!((e - scale * vi).abs() < 1e-12);
    }
}

#[test]
fn analytic_optima_have_unit_reward() {
    for (n, ent) in [(2, true), (4, true), (6, true), (2, false), (4, false), (12, false), (12, true)] {
        let t = CircuitTemplate::parity(n, ent).unwrap();
        let env = BanditEnv::new(n, OptimalRule::Parity, 0).unwrap();
        let r = exact_expected_reward(&t, &env, &parity_optimum(n, ent), None).unwrap();
        assert!((r - 1.0).abs() < 1e-10, "n={n} ent={ent}: {r}");
    }
    let t = CircuitTemplate::bandit1q();
    let env = BanditEnv::new(1, OptimalRule::Constant(0), 0).unwrap();
    assert!((exact_expected_reward(&t, &env, &[0.0, FRAC_PI_2], None).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn oracle_expected_reward_agrees() {
    let t = CircuitTemplate::parity(4, true).unwrap();
    let env = BanditEnv::new(4, OptimalRule::Parity, 0).unwrap();
    let mut rng = trainer_rng(9);
    let theta = random_theta(&mut rng, 12);
    let oracle: f64 = (0..16)
        .map(|s| {
            let best = (s as u32).count_ones() as usize % 2;
            2.0 * oracle_prob(&t, s, &theta, best) - 1.0
        })
        .sum::<f64>()
        / 16.0;
    let ours = exact_expected_reward(&t, &env, &theta, None).unwrap();
    assert!((ours - oracle).abs() < 1e-12);
}

#[test]
fn gradient_ascent_finds_the_entangling_optimum_from_random_starts() {
    // The closed-form optimum is not the only route: plain exact gradient
    // ascent from random starts reaches it for small registers.
    let n = 2;
    let t = CircuitTemplate::parity(n, true).unwrap();
    let env = BanditEnv::new(n, OptimalRule::Parity, 0).unwrap();
    let mut rng = trainer_rng(10);
    let mut best = f64::MIN;
    for _ in 0..10 {
        let mut theta = random_theta(&mut rng, t.n_params());
        for _ in 0..400 {
            let mut grad = vec![0.0; theta.len()];
            for s in 0..t.n_states() {
                let a = env.optimal_action(s).unwrap();
                let g = param_shift_grad(&t, s, &theta, a, Estimator::Exact, &mut rng).unwrap();
                for (x, v) in grad.iter_mut().zip(&g.values) {
                    *x += 2.0 * v / t.n_states() as f64;
                }
            }
            for (x, v) in theta.iter_mut().zip(&grad) {
                *x += 0.5 * v;
            }
        }
        best = best.max(exact_expected_reward(&t, &env, &theta, None).unwrap());
    }
    assert!(best >= 0.999, "best {best}");
}

#[test]
fn block_metric_is_singular_at_the_entangling_optimum() {
    // Documents why unregularized natural updates become noise-sensitive
    // close to the optimum: the last layer's block loses rank there.
    let n = 6;
    let t = CircuitTemplate::parity(n, true).unwrap();
    let theta = parity_optimum(n, true);
    let mut min_eig = f64::MAX;
    for s in 0..t.n_states() {
        let g = fubini_study_block_diag(&t, s, &theta).unwrap();
        let eig = g.matrix.symmetric_eigen().eigenvalues;
        min_eig = min_eig.min(eig.min());
    }
    assert!(min_eig.abs() < 1e-12, "{min_eig}");
}

//! Property-based invariants.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use qnpg_core::metric::fubini_study;
use qnpg_core::trainer::trainer_rng;
use qnpg_core::{
    circuit_budget, exact_expected_reward, exact_policy, solve_least_squares, solve_ridge, BanditEnv,
    CircuitTemplate, Gate, GradMethod, MetricMode, MetricTensor, OptimalRule, StateVector, TensorMode,
};

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let a = -PI..PI;
    prop_oneof![
        q.clone().prop_map(Gate::H),
        (q.clone(), a.clone()).prop_map(|(q, a)| Gate::Rx(q, a)),
        (q.clone(), a.clone()).prop_map(|(q, a)| Gate::Ry(q, a)),
        (q.clone(), a.clone()).prop_map(|(q, a)| Gate::Rz(q, a)),
        (q.clone(), a).prop_map(|(q, a)| Gate::Phase(q, a)),
        (q.clone(), 1..n.max(2)).prop_map(move |(c, d)| Gate::Cx {
            control: c,
            target: (c + d) % n.max(2),
        }),
    ]
}

fn theta(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI..PI, p)
}

fn spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| {
        let a = DMatrix::from_vec(n, n, v);
        &a * a.transpose()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm_and_invert(gates in prop::collection::vec(gate(3), 0..30)) {
        let mut psi = StateVector::zero(3).unwrap();
        psi.apply_all(&gates).unwrap();
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((psi.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for g in gates.iter().rev() {
            psi.apply_gate(&g.inverse()).unwrap();
        }
        prop_assert!((psi.amplitudes()[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn policy_is_a_distribution(t in theta(12), s in 0usize..16) {
        let tpl = CircuitTemplate::parity(4, true).unwrap();
        let p = exact_policy(&tpl, s, &t).unwrap();
        prop_assert!((0.0..=1.0).contains(&p.p1()));
        prop_assert!((p.p0() + p.p1() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_reward_in_range_and_periodic(t in theta(6), k in 0usize..6) {
        let tpl = CircuitTemplate::parity(2, true).unwrap();
        let env = BanditEnv::new(2, OptimalRule::Parity, 0).unwrap();
        let r = exact_expected_reward(&tpl, &env, &t, None).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
        let mut shifted = t.clone();
        shifted[k] += 4.0 * PI;
        let r2 = exact_expected_reward(&tpl, &env, &shifted, None).unwrap();
        prop_assert!((r - r2).abs() < 1e-10);
    }

    #[test]
    fn metric_is_symmetric_psd_and_nested(t in theta(12), s in 0usize..16) {
        let tpl = CircuitTemplate::parity(4, true).unwrap();
        let full = fubini_study(&tpl, s, &t, TensorMode::Full).unwrap();
        let block = fubini_study(&tpl, s, &t, TensorMode::BlockDiagonal).unwrap();
        let diag = fubini_study(&tpl, s, &t, TensorMode::Diagonal).unwrap();
        prop_assert!((&full.matrix - full.matrix.transpose()).abs().max() < 1e-10);
        prop_assert!(full.matrix.clone().symmetric_eigen().eigenvalues.min() >= -1e-8);
        for i in 0..12 {
            for j in 0..12 {
                let same_layer = i / 4 == j / 4;
                prop_assert_eq!(block.matrix[(i, j)], if same_layer { full.matrix[(i, j)] } else { 0.0 });
                prop_assert_eq!(diag.matrix[(i, j)], if i == j { full.matrix[(i, j)] } else { 0.0 });
            }
        }
    }

    #[test]
    fn least_squares_residual_is_optimal(g in spd(4), b in prop::collection::vec(-1.0..1.0f64, 4)) {
        let mut m = MetricTensor::identity(4);
        m.matrix = g.clone();
        let eta = solve_least_squares(&m, &b).unwrap().eta;
        let obj = |e: &[f64]| {
            let r = &g * nalgebra::DVector::from_column_slice(e) - nalgebra::DVector::from_column_slice(&b);
            r.norm_squared()
        };
        let base = obj(&eta);
        for k in 0..4 {
            for d in [-1e-4, 1e-4] {
                let mut e = eta.clone();
                e[k] += d;
                prop_assert!(obj(&e) >= base - 1e-12);
            }
        }
    }

    #[test]
    fn least_squares_commutes_with_scale(g in spd(3), b in prop::collection::vec(-1.0..1.0f64, 3), c in 0.1..10.0f64) {
        prop_assume!(g.clone().symmetric_eigen().eigenvalues.min() > 1e-3);
        let mut m = MetricTensor::identity(3);
        m.matrix = g.clone();
        let e1 = solve_least_squares(&m, &b).unwrap().eta;
        let m2 = m.scaled(c);
        let b2: Vec<f64> = b.iter().map(|x| c * x).collect();
        let e2 = solve_least_squares(&m2, &b2).unwrap().eta;
        for (x, y) in e1.iter().zip(&e2) {
            prop_assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn ridge_norm_shrinks(g in spd(4), b in prop::collection::vec(-1.0..1.0f64, 4)) {
        let mut m = MetricTensor::identity(4);
        m.matrix = g;
        let norms: Vec<f64> = [1e-4, 1e-2, 1.0]
            .iter()
            .map(|&xi| solve_ridge(&m, &b, xi).unwrap().eta.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        prop_assert!(norms[0] >= norms[1] - 1e-12 && norms[1] >= norms[2] - 1e-12);
    }

    #[test]
    fn budget_is_additive_over_batches(b in 1usize..50, samples in 1usize..20) {
        for grad in [GradMethod::ParamShift, GradMethod::Spsa { samples, c: 0.1 }] {
            for metric in [None, Some(MetricMode::BlockDiagonal)] {
                let one = circuit_budget(12, 36, 1, grad, metric).unwrap();
                let many = circuit_budget(12, 36, b, grad, metric).unwrap();
                prop_assert_eq!(many.total, b * one.total);
            }
        }
    }

    #[test]
    fn sampled_bitstrings_are_in_range(seed in any::<u64>(), t in theta(6)) {
        let tpl = CircuitTemplate::parity(2, true).unwrap();
        let psi = tpl.prepare(1, &t).unwrap();
        let mut rng = trainer_rng(seed);
        let bits = psi.sample_bitstrings(64, &mut rng).unwrap();
        prop_assert!(bits.iter().all(|b| b.index() < 4 && b.n_qubits() == 2));
    }
}

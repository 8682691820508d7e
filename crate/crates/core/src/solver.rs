//! Natural-gradient linear solves `g eta = grad`.
//!
//! Both paths go through an SVD of `g`: the least-squares path keeps singular
//! values above `rcond * sigma_max` (minimum-norm solution), the ridge path
//! applies Tikhonov filter factors `sigma / (sigma^2 + xi)`, which equals
//! `(g^T g + xi I)^{-1} g^T grad`.

use nalgebra::{DMatrix, DVector};

use crate::error::{QnpgError, Result};
use crate::metric::MetricTensor;

/// Relative singular-value cutoff for the pseudoinverse.
pub const RCOND: f64 = 1e-8;

/// Default ridge penalty.
pub const DEFAULT_XI: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalUpdate {
    pub eta: Vec<f64>,
    pub residual_norm: f64,
    pub regularization: f64,
    pub rank_deficient: bool,
}

fn prepare(g: &MetricTensor, grad: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if g.dim() != grad.len() {
        return Err(QnpgError::Dimension {
            expected: g.dim(),
            actual: grad.len(),
        });
    }
    if g.matrix.iter().any(|v| !v.is_finite()) {
        return Err(QnpgError::Numeric("metric tensor"));
    }
    if grad.iter().any(|v| !v.is_finite()) {
        return Err(QnpgError::Numeric("gradient"));
    }
    Ok((g.matrix.clone(), DVector::from_column_slice(grad)))
}

fn finish(g: &DMatrix<f64>, b: &DVector<f64>, eta: DVector<f64>, xi: f64, rank_deficient: bool) -> Result<NaturalUpdate> {
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(QnpgError::Numeric("natural update"));
    }
    let residual_norm = (g * &eta - b).norm();
    Ok(NaturalUpdate {
        eta: eta.iter().copied().collect(),
        residual_norm,
        regularization: xi,
        rank_deficient,
    })
}

/// Minimum-norm least-squares solution (pseudoinverse semantics).
pub fn solve_least_squares(g: &MetricTensor, grad: &[f64]) -> Result<NaturalUpdate> {
    let (m, b) = prepare(g, grad)?;
    let n = m.nrows();
    if n == 0 {
        return finish(&m, &b, DVector::zeros(0), 0.0, false);
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = RCOND * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let eta = if sigma_max == 0.0 {
        DVector::zeros(n)
    } else {
        svd.solve(&b, cutoff).map_err(|_| QnpgError::Numeric("pseudoinverse"))?
    };
    finish(&m, &b, eta, 0.0, rank < n)
}

/// Ridge-regularized solution of `min |g eta - grad|^2 + xi |eta|^2`.
pub fn solve_ridge(g: &MetricTensor, grad: &[f64], xi: f64) -> Result<NaturalUpdate> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(QnpgError::config(format!(
            "ridge penalty must be positive, got {xi}; use least squares for zero"
        )));
    }
    let (m, b) = prepare(g, grad)?;
    let n = m.nrows();
    if n == 0 {
        return finish(&m, &b, DVector::zeros(0), xi, false);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let ut_b = u.transpose() * &b;
    let filtered = DVector::from_iterator(
        ut_b.len(),
        ut_b.iter()
            .zip(svd.singular_values.iter())
            .map(|(c, &s)| c * s / (s * s + xi)),
    );
    let eta = v_t.transpose() * filtered;
    let sigma_max = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RCOND * sigma_max)
        .count();
    finish(&m, &b, eta, xi, rank < n)
}

/// Ridge when `xi > 0`, least squares otherwise.
pub fn solve(g: &MetricTensor, grad: &[f64], xi: f64) -> Result<NaturalUpdate> {
    if xi > 0.0 {
        solve_ridge(g, grad, xi)
    } else {
        solve_least_squares(g, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::TensorMode;

    fn tensor(rows: usize, data: &[f64]) -> MetricTensor {
        MetricTensor {
            matrix: DMatrix::from_row_slice(rows, rows, data),
            mode: TensorMode::Full,
            blocks: vec![0..rows],
        }
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn identity_metric_returns_gradient() {
        let u = solve_least_squares(&MetricTensor::identity(2), &[0.3, -0.7]).unwrap();
        assert_eq!(u.eta, vec![0.3, -0.7]);
        assert!(!u.rank_deficient);
        assert!(u.residual_norm < 1e-15);
    }

    #[test]
    fn scaled_identity() {
        let u = solve_least_squares(&tensor(2, &[2.0, 0.0, 0.0, 2.0]), &[1.0, 1.0]).unwrap();
        assert!(close(&u.eta, &[0.5, 0.5], 1e-14));
    }

    #[test]
    fn rank_one_gives_minimum_norm() {
        let u = solve_least_squares(&tensor(2, &[1.0, 0.0, 0.0, 0.0]), &[1.0, 1.0]).unwrap();
        assert!(close(&u.eta, &[1.0, 0.0], 1e-14));
        assert!(u.rank_deficient);
        assert!((u.residual_norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_metric_gives_zero_update() {
        let u = solve_least_squares(&tensor(2, &[0.0; 4]), &[1.0, 1.0]).unwrap();
        assert_eq!(u.eta, vec![0.0, 0.0]);
        assert!(u.rank_deficient);
    }

    #[test]
    fn ridge_on_identity() {
        let u = solve_ridge(&MetricTensor::identity(2), &[1.0, 1.0], 1.0).unwrap();
        assert!(close(&u.eta, &[0.5, 0.5], 1e-14));
        assert_eq!(u.regularization, 1.0);
    }

    #[test]
    fn ridge_rejects_nonpositive_penalty() {
        let g = MetricTensor::identity(2);
        assert!(matches!(solve_ridge(&g, &[1.0, 1.0], 0.0), Err(QnpgError::Config(_))));
        assert!(solve_ridge(&g, &[1.0, 1.0], -1.0).is_err());
    }

    #[test]
    fn input_validation() {
        let g = MetricTensor::identity(2);
        assert!(matches!(
            solve_least_squares(&g, &[1.0]),
            Err(QnpgError::Dimension { expected: 2, actual: 1 })
        ));
        assert!(matches!(solve_least_squares(&g, &[1.0, f64::NAN]), Err(QnpgError::Numeric(_))));
        assert!(solve_least_squares(&tensor(2, &[f64::INFINITY, 0.0, 0.0, 1.0]), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn dispatch_on_xi() {
        let g = tensor(2, &[2.0, 0.0, 0.0, 2.0]);
        assert_eq!(solve(&g, &[1.0, 1.0], 0.0).unwrap().regularization, 0.0);
        assert_eq!(solve(&g, &[1.0, 1.0], 0.1).unwrap().regularization, 0.1);
    }
}

//! Regularized linear regression: ridge by a symmetric solve of the
//! regularized normal equations, lasso by cyclic coordinate descent.
//!
//! Conventions, chosen so each solver has a clean closed-form oracle:
//!
//! - ridge minimizes `||y - b0 - X b||^2 + lambda * ||b||^2` (unscaled RSS);
//! - lasso minimizes `(1/2n) * ||y - b0 - X b||^2 + lambda * ||b||_1`, so
//!   its `lambda` is sample-size independent;
//! - the intercept `b0` is never penalized (both fits center the data).

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::linalg::{centered, cholesky_solve};
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    None,
    Ridge { lambda: f64 },
    Lasso { lambda: f64 },
}

/// A fitted linear predictor `y = intercept + x . coefficients`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub penalty: Penalty,
}

impl LinearModel {
    pub fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        debug_assert_eq!(row.len(), self.coefficients.len());
        self.intercept
            + row
                .iter()
                .zip(&self.coefficients)
                .map(|(x, b)| x * b)
                .sum::<f64>()
    }
}

fn check_dims(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<(), ModelError> {
    if x.nrows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            x_rows: x.nrows(),
            y_len: y.len(),
        });
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    Ok(())
}

/// Ridge regression via the regularized normal equations on centered data:
/// solve `(Xc' Xc + lambda I) b = Xc' yc`, then `b0 = mean(y) - mean(x).b`.
/// With `lambda = 0` this is ordinary least squares and fails on
/// rank-deficient designs.
pub fn fit_ridge(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    lambda: f64,
) -> Result<LinearModel, ModelError> {
    check_dims(x, y)?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(ModelError::InvalidParameter("lambda must be >= 0".into()));
    }
    let (xc, yc, x_mean, y_mean) = centered(x, y);
    let mut gram = xc.t().dot(&xc);
    for j in 0..gram.nrows() {
        gram[(j, j)] += lambda;
    }
    let rhs = xc.t().dot(&yc);
    let beta = cholesky_solve(&gram, &rhs).ok_or(ModelError::SingularSystem)?;
    let intercept = y_mean - x_mean.dot(&beta);
    Ok(LinearModel {
        intercept,
        coefficients: beta.to_vec(),
        penalty: if lambda == 0.0 {
            Penalty::None
        } else {
            Penalty::Ridge { lambda }
        },
    })
}

/// Outcome of a lasso fit: the model plus convergence diagnostics and any
/// standardization warnings (the solver expects standardized features).
#[derive(Debug, Clone)]
pub struct LassoFit {
    pub model: LinearModel,
    pub iterations: u32,
    pub warnings: Vec<String>,
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Lasso via cyclic coordinate descent with the soft-threshold update
/// `S(z, gamma) = sign(z) * max(|z| - gamma, 0)`. Converged when the
/// largest coefficient change in a sweep drops below `tol`.
pub fn fit_lasso(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    lambda: f64,
    tol: f64,
    max_iter: u32,
) -> Result<LassoFit, ModelError> {
    check_dims(x, y)?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(ModelError::InvalidParameter("lambda must be >= 0".into()));
    }
    if max_iter == 0 {
        return Err(ModelError::InvalidParameter("max_iter must be >= 1".into()));
    }
    let n = x.nrows();
    let p = x.ncols();
    let nf = n as f64;

    let mut warnings = Vec::new();
    for j in 0..p {
        let col = x.column(j);
        let mean = col.sum() / nf;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf).sqrt();
        if mean.abs() > 1e-6 || (sd - 1.0).abs() > 1e-6 {
            warnings.push(format!(
                "column {j} is not standardized (mean {mean:.3}, sd {sd:.3})"
            ));
        }
    }

    let (xc, yc, x_mean, y_mean) = centered(x, y);
    let col_sq: Vec<f64> = (0..p)
        .map(|j| xc.column(j).iter().map(|v| v * v).sum::<f64>() / nf)
        .collect();

    let mut beta = Array1::<f64>::zeros(p);
    let mut residual = yc.clone();
    let mut last_delta = f64::INFINITY;
    for iter in 1..=max_iter {
        let mut delta_max: f64 = 0.0;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = xc.column(j);
            let rho = col.dot(&residual) / nf + col_sq[j] * beta[j];
            let updated = soft_threshold(rho, lambda) / col_sq[j];
            let change = updated - beta[j];
            if change != 0.0 {
                residual.zip_mut_with(&col, |r, &c| *r -= c * change);
                beta[j] = updated;
            }
            delta_max = delta_max.max(change.abs());
        }
        if delta_max < tol {
            let intercept = y_mean - x_mean.dot(&beta);
            return Ok(LassoFit {
                model: LinearModel {
                    intercept,
                    coefficients: beta.to_vec(),
                    penalty: Penalty::Lasso { lambda },
                },
                iterations: iter,
                warnings,
            });
        }
        last_delta = delta_max;
    }
    Err(ModelError::NotConverged {
        iterations: max_iter,
        delta: last_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fdf_testkit::lasso as oracle;
    use ndarray::{array, Array1, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ridge_scalar_closed_form() {
        // x = [1, -1], y = [1, -1]: beta = x'y / (x'x + lambda) = 2/(2+lambda).
        let x = array![[1.0], [-1.0]];
        let y = array![1.0, -1.0];
        for lambda in [0.0, 0.5, 1.0, 10.0] {
            let model = fit_ridge(x.view(), y.view(), lambda).unwrap();
            assert!((model.coefficients[0] - 2.0 / (2.0 + lambda)).abs() < 1e-10);
            assert!(model.intercept.abs() < 1e-10);
        }
    }

    #[test]
    fn ridge_at_zero_matches_least_squares_stationarity() {
        // At lambda = 0 the residual must be orthogonal to the centered
        // design (normal equations hold exactly).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((40, 4), |_| rng.gen_range(-2.0..2.0));
        let y = Array1::from_shape_fn(40, |i| {
            1.5 + 2.0 * x[(i, 0)] - x[(i, 2)] + rng.gen_range(-0.1..0.1)
        });
        let model = fit_ridge(x.view(), y.view(), 0.0).unwrap();
        let preds = Array1::from_shape_fn(40, |i| model.predict_row(x.row(i)));
        let resid = &y - &preds;
        assert!(resid.sum().abs() < 1e-8); // intercept stationarity
        for j in 0..4 {
            assert!(x.column(j).dot(&resid).abs() < 1e-8);
        }
        assert!(matches!(model.penalty, Penalty::None));
    }

    #[test]
    fn heavy_ridge_shrinks_to_intercept() {
        let x = array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.5], [-2.0, 1.0]];
        let y = array![3.0, 1.0, 2.0, 0.0];
        let model = fit_ridge(x.view(), y.view(), 1e12).unwrap();
        let norm: f64 = model.coefficients.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(norm < 1e-6);
        assert!((model.intercept - y.mean().unwrap()).abs() < 1e-6);
    }

    #[test]
    fn ridge_rejects_rank_deficiency_only_unregularized() {
        let x = array![[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let y = array![1.0, 2.0, 3.0];
        assert!(matches!(
            fit_ridge(x.view(), y.view(), 0.0),
            Err(ModelError::SingularSystem)
        ));
        assert!(fit_ridge(x.view(), y.view(), 0.1).is_ok());
    }

    #[test]
    fn ridge_norm_is_non_increasing_in_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Array2::from_shape_fn((30, 3), |_| rng.gen_range(-1.0..1.0));
        let y = Array1::from_shape_fn(30, |i| x[(i, 0)] - 2.0 * x[(i, 1)]);
        let mut previous = f64::INFINITY;
        for lambda in [0.0, 0.01, 0.1, 1.0, 10.0, 100.0] {
            let model = fit_ridge(x.view(), y.view(), lambda).unwrap();
            let norm: f64 = model.coefficients.iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!(norm <= previous + 1e-12);
            previous = norm;
        }
    }

    #[test]
    fn lasso_soft_threshold_scalar_cases() {
        let x = array![[1.0], [-1.0]];
        let y = array![1.0, -1.0];
        let fit = fit_lasso(x.view(), y.view(), 0.4, 1e-10, 10_000).unwrap();
        assert!((fit.model.coefficients[0] - 0.6).abs() < 1e-9);
        for lambda in [1.0, 1.5, 4.0] {
            let fit = fit_lasso(x.view(), y.view(), lambda, 1e-10, 10_000).unwrap();
            assert_eq!(fit.model.coefficients[0], 0.0);
        }
    }

    #[test]
    fn lasso_at_zero_matches_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((25, 3), |_| rng.gen_range(-1.0..1.0));
        let y = Array1::from_shape_fn(25, |i| 0.5 + x[(i, 0)] - 3.0 * x[(i, 2)]);
        let ols = fit_ridge(x.view(), y.view(), 0.0).unwrap();
        let lasso = fit_lasso(x.view(), y.view(), 0.0, 1e-12, 100_000).unwrap();
        for (a, b) in lasso.model.coefficients.iter().zip(&ols.coefficients) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((lasso.model.intercept - ols.intercept).abs() < 1e-8);
    }

    #[test]
    fn lasso_l1_norm_non_increasing_on_lambda_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Array2::from_shape_fn((40, 4), |_| rng.gen_range(-1.0..1.0));
        let y = Array1::from_shape_fn(40, |i| {
            2.0 * x[(i, 0)] - x[(i, 1)] + 0.3 * x[(i, 3)] + rng.gen_range(-0.2..0.2)
        });
        let mut previous = f64::INFINITY;
        for step in 0..10 {
            let lambda = 0.02 * step as f64;
            let fit = fit_lasso(x.view(), y.view(), lambda, 1e-10, 100_000).unwrap();
            let l1: f64 = fit.model.coefficients.iter().map(|b| b.abs()).sum();
            assert!(l1 <= previous + 1e-9, "l1 grew at lambda={lambda}");
            previous = l1;
        }
    }

    #[test]
    fn lasso_objective_beats_proximal_gradient_oracle() {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(10..=50);
            let p = rng.gen_range(1..=5);
            let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-2.0..2.0));
            let y = Array1::from_shape_fn(n, |i| {
                x.row(i).sum() * 0.7 + rng.gen_range(-1.0..1.0)
            });
            let lambda = rng.gen_range(0.01..0.5);
            let fit = fit_lasso(x.view(), y.view(), lambda, 1e-10, 100_000).unwrap();
            let mine = oracle::objective(
                x.view(),
                y.view(),
                fit.model.intercept,
                Array1::from_vec(fit.model.coefficients.clone()).view(),
                lambda,
            );
            let (oracle_b0, oracle_beta) = oracle::solve(x.view(), y.view(), lambda, 200_000);
            let theirs = oracle::objective(x.view(), y.view(), oracle_b0, oracle_beta.view(), lambda);
            assert!(
                mine <= theirs + 1e-8,
                "seed {seed}: cd objective {mine} vs oracle {theirs}"
            );
        }
    }

    #[test]
    fn lasso_objective_never_worse_than_zero_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = Array2::from_shape_fn((30, 3), |_| rng.gen_range(-1.0..1.0));
        let y = Array1::from_shape_fn(30, |i| x[(i, 1)] * 2.0 + rng.gen_range(-0.3..0.3));
        let lambda = 0.05;
        let fit = fit_lasso(x.view(), y.view(), lambda, 1e-10, 100_000).unwrap();
        let at_solution = oracle::objective(
            x.view(),
            y.view(),
            fit.model.intercept,
            Array1::from_vec(fit.model.coefficients.clone()).view(),
            lambda,
        );
        let at_zero = oracle::objective(
            x.view(),
            y.view(),
            y.mean().unwrap(),
            Array1::zeros(3).view(),
            lambda,
        );
        assert!(at_solution <= at_zero + 1e-12);
    }

    #[test]
    fn lasso_reports_non_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = Array2::from_shape_fn((20, 3), |_| rng.gen_range(-1.0..1.0));
        let y = Array1::from_shape_fn(20, |i| x[(i, 0)] * 4.0);
        match fit_lasso(x.view(), y.view(), 0.001, 1e-14, 1) {
            Err(ModelError::NotConverged { iterations, delta }) => {
                assert_eq!(iterations, 1);
                assert!(delta > 0.0);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn lasso_warns_on_unstandardized_features() {
        let x = array![[10.0], [30.0]];
        let y = array![1.0, 2.0];
        let fit = fit_lasso(x.view(), y.view(), 0.01, 1e-10, 10_000).unwrap();
        assert_eq!(fit.warnings.len(), 1);
        let xs = array![[1.0], [-1.0]];
        let ys = array![1.0, -1.0];
        let clean = fit_lasso(xs.view(), ys.view(), 0.01, 1e-10, 10_000).unwrap();
        assert!(clean.warnings.is_empty());
    }

    #[test]
    fn constant_column_gets_zero_coefficient() {
        let x = array![[1.0, 5.0], [-1.0, 5.0], [1.0, 5.0], [-1.0, 5.0]];
        let y = array![1.0, -1.0, 1.0, -1.0];
        let fit = fit_lasso(x.view(), y.view(), 0.01, 1e-10, 10_000).unwrap();
        assert_eq!(fit.model.coefficients[1], 0.0);
        assert!(fit.model.coefficients[0] > 0.5);
    }
}

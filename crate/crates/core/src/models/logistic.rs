//! L2-regularized logistic regression fit by damped Newton ascent.
//!
//! The objective is the log-likelihood of the binary labels minus
//! `(l2/2) * ||b||^2`, with the intercept unpenalized. Convergence is
//! declared when the gradient's infinity norm drops below 1e-8.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::linalg::cholesky_solve;
use super::ModelError;

const GRADIENT_TOL: f64 = 1e-8;
const MAX_NEWTON_ITER: u32 = 500;
const SEPARATION_NORM: f64 = 1e6;

/// Fitted logistic model: `log(p/(1-p)) = intercept + x . coefficients`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LogisticModel {
    pub fn predict_proba(&self, row: ArrayView1<f64>) -> f64 {
        let z = self.intercept
            + row
                .iter()
                .zip(&self.coefficients)
                .map(|(x, b)| x * b)
                .sum::<f64>();
        sigmoid(z)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Penalized log-likelihood at `(intercept, coefficients)`.
pub fn log_likelihood(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    l2: f64,
    intercept: f64,
    coefficients: &[f64],
) -> f64 {
    let mut total = 0.0;
    for i in 0..x.nrows() {
        let z = intercept
            + x.row(i)
                .iter()
                .zip(coefficients)
                .map(|(v, b)| v * b)
                .sum::<f64>();
        // log p for y=1, log(1-p) for y=0, in the stable log1p form.
        total += y[i] * z - z.max(0.0) - (-z.abs()).exp().ln_1p();
    }
    total - 0.5 * l2 * coefficients.iter().map(|b| b * b).sum::<f64>()
}

/// Analytic gradient of the penalized log-likelihood with respect to
/// `[intercept, coefficients...]`.
pub fn gradient(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    l2: f64,
    intercept: f64,
    coefficients: &[f64],
) -> Vec<f64> {
    let p = coefficients.len();
    let mut grad = vec![0.0; p + 1];
    for i in 0..x.nrows() {
        let z = intercept
            + x.row(i)
                .iter()
                .zip(coefficients)
                .map(|(v, b)| v * b)
                .sum::<f64>();
        let err = y[i] - sigmoid(z);
        grad[0] += err;
        for j in 0..p {
            grad[j + 1] += x[(i, j)] * err;
        }
    }
    for j in 0..p {
        grad[j + 1] -= l2 * coefficients[j];
    }
    grad
}

/// Maximizes the penalized log-likelihood. With `l2 = 0` both classes must
/// be present and separable data is rejected once coefficients blow up.
pub fn fit_logistic(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    l2: f64,
) -> Result<LogisticModel, ModelError> {
    if x.nrows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            x_rows: x.nrows(),
            y_len: y.len(),
        });
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(ModelError::NonBinaryTarget);
    }
    if l2.is_nan() || l2 < 0.0 {
        return Err(ModelError::InvalidParameter("l2 must be >= 0".into()));
    }
    if l2 == 0.0 {
        let positives = y.iter().filter(|v| **v == 1.0).count();
        if positives == 0 || positives == y.len() {
            return Err(ModelError::Separable);
        }
    }

    let n = x.nrows();
    let p = x.ncols();

    // Constant columns are absorbed by the intercept; their stationary
    // coefficient is exactly zero, so drop them from the Newton system.
    let active: Vec<usize> = (0..p)
        .filter(|&j| {
            let first = x[(0, j)];
            (1..n).any(|i| x[(i, j)] != first)
        })
        .collect();
    if active.len() < p {
        let xa = ndarray::Array2::from_shape_fn((n, active.len()), |(i, j)| x[(i, active[j])]);
        let reduced = fit_logistic(xa.view(), y, l2)?;
        let mut coefficients = vec![0.0; p];
        for (slot, j) in active.iter().enumerate() {
            coefficients[*j] = reduced.coefficients[slot];
        }
        return Ok(LogisticModel {
            intercept: reduced.intercept,
            coefficients,
        });
    }

    let mut intercept = 0.0;
    let mut beta = vec![0.0f64; p];
    let mut value = log_likelihood(x, y, l2, intercept, &beta);

    for _ in 0..MAX_NEWTON_ITER {
        let grad = gradient(x, y, l2, intercept, &beta);
        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm < GRADIENT_TOL {
            check_separation(x, y, l2, intercept, &beta)?;
            return Ok(LogisticModel {
                intercept,
                coefficients: beta,
            });
        }

        // Newton system on the augmented design [1 | X]: H = Z'WZ + l2*D.
        let mut hessian = Array2::<f64>::zeros((p + 1, p + 1));
        for i in 0..n {
            let z = intercept
                + x.row(i)
                    .iter()
                    .zip(&beta)
                    .map(|(v, b)| v * b)
                    .sum::<f64>();
            let prob = sigmoid(z);
            let w = (prob * (1.0 - prob)).max(1e-12);
            let mut zi = Vec::with_capacity(p + 1);
            zi.push(1.0);
            zi.extend(x.row(i).iter().copied());
            for a in 0..=p {
                for b in a..=p {
                    hessian[(a, b)] += w * zi[a] * zi[b];
                }
            }
        }
        for a in 0..=p {
            for b in 0..a {
                hessian[(a, b)] = hessian[(b, a)];
            }
        }
        for j in 1..=p {
            hessian[(j, j)] += l2;
        }

        let step = match cholesky_solve(&hessian, &Array1::from_vec(grad)) {
            Some(s) => s,
            None if l2 == 0.0 => return Err(ModelError::Separable),
            None => return Err(ModelError::SingularSystem),
        };

        // Damped update: halve until the objective does not decrease
        // (up to rounding noise in the likelihood evaluation).
        let tolerance = 1e-12 * (1.0 + value.abs());
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand_intercept = intercept + scale * step[0];
            let cand_beta: Vec<f64> = beta
                .iter()
                .enumerate()
                .map(|(j, b)| b + scale * step[j + 1])
                .collect();
            let cand_value = log_likelihood(x, y, l2, cand_intercept, &cand_beta);
            if cand_value >= value - tolerance {
                intercept = cand_intercept;
                beta = cand_beta;
                value = cand_value;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }

        let coef_norm = beta
            .iter()
            .chain(std::iter::once(&intercept))
            .fold(0.0f64, |m, b| m.max(b.abs()));
        if l2 == 0.0 && coef_norm > SEPARATION_NORM {
            return Err(ModelError::Separable);
        }
    }

    let grad = gradient(x, y, l2, intercept, &beta);
    let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if grad_norm < GRADIENT_TOL {
        check_separation(x, y, l2, intercept, &beta)?;
        Ok(LogisticModel {
            intercept,
            coefficients: beta,
        })
    } else {
        Err(ModelError::NotConverged {
            iterations: MAX_NEWTON_ITER,
            delta: grad_norm,
        })
    }
}

/// With no penalty, a vanishing gradient at perfectly classified training
/// data means the likelihood supremum is not attained: the data are
/// separable and the coefficients are drifting to infinity.
fn check_separation(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    l2: f64,
    intercept: f64,
    beta: &[f64],
) -> Result<(), ModelError> {
    if l2 > 0.0 {
        return Ok(());
    }
    let perfectly_classified = (0..x.nrows()).all(|i| {
        let z = intercept
            + x.row(i)
                .iter()
                .zip(beta)
                .map(|(v, b)| v * b)
                .sum::<f64>();
        (y[i] - sigmoid(z)).abs() < 1e-6
    });
    if perfectly_classified {
        Err(ModelError::Separable)
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fdf_testkit::numeric::central_difference;
    use ndarray::{array, Array1, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_linear_predictor_gives_half() {
        let model = LogisticModel {
            intercept: 0.0,
            coefficients: vec![0.0, 0.0],
        };
        assert_eq!(model.predict_proba(array![3.0, -1.0].view()), 0.5);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(8..40);
            let p = rng.gen_range(1..5);
            let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-2.0..2.0));
            let y = Array1::from_shape_fn(n, |_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
            let l2 = rng.gen_range(0.0..1.0);
            let point: Vec<f64> = (0..=p).map(|_| rng.gen_range(-1.0..1.0)).collect();

            let analytic = gradient(x.view(), y.view(), l2, point[0], &point[1..]);
            let numeric = central_difference(
                |theta| log_likelihood(x.view(), y.view(), l2, theta[0], &theta[1..]),
                &point,
                1e-5,
            );
            for (a, fd) in analytic.iter().zip(&numeric) {
                let denom = a.abs().max(fd.abs()).max(1e-8);
                assert!(
                    ((a - fd) / denom).abs() <= 1e-6,
                    "seed {seed}: {a} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn intercept_only_fit_is_stationary_at_logit_of_mean() {
        // All-zero features and balanced labels: alpha = logit(mean(y)), b = 0.
        let x = Array2::<f64>::zeros((8, 2));
        let y = array![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        let model = fit_logistic(x.view(), y.view(), 0.0).unwrap();
        let mean = y.mean().unwrap();
        let expected = (mean / (1.0 - mean)).ln();
        assert!((model.intercept - expected).abs() < 1e-6);
        for b in &model.coefficients {
            assert!(b.abs() < 1e-8);
        }
    }

    #[test]
    fn recovers_probabilities_on_generated_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 400;
        let x = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-2.0..2.0));
        let y = Array1::from_shape_fn(n, |i| {
            let z = 0.5 + 1.5 * x[(i, 0)] - x[(i, 1)];
            if rng.gen_bool(sigmoid(z)) {
                1.0
            } else {
                0.0
            }
        });
        let model = fit_logistic(x.view(), y.view(), 0.0).unwrap();
        assert!((model.coefficients[0] - 1.5).abs() < 0.4);
        assert!((model.coefficients[1] + 1.0).abs() < 0.4);
    }

    #[test]
    fn separable_data_is_detected_without_regularization() {
        let x = array![[-2.0], [-1.5], [-1.0], [1.0], [1.5], [2.0]];
        let y = array![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        assert!(matches!(
            fit_logistic(x.view(), y.view(), 0.0),
            Err(ModelError::Separable)
        ));
        // Ridge-penalized likelihood is bounded; the same data fits fine.
        let model = fit_logistic(x.view(), y.view(), 0.5).unwrap();
        assert!(model.coefficients[0] > 0.0);
    }

    #[test]
    fn one_class_without_penalty_is_separable() {
        let x = array![[1.0], [2.0]];
        let y = array![1.0, 1.0];
        assert!(matches!(
            fit_logistic(x.view(), y.view(), 0.0),
            Err(ModelError::Separable)
        ));
    }

    #[test]
    fn rejects_non_binary_targets() {
        let x = array![[1.0], [2.0]];
        let y = array![0.0, 2.0];
        assert!(matches!(
            fit_logistic(x.view(), y.view(), 0.1),
            Err(ModelError::NonBinaryTarget)
        ));
    }
}

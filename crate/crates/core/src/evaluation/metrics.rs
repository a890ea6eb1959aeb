//! Error metrics over aligned prediction/actual pairs.
//!
//! Errors are `e = prediction - actual`. MAPE is reported in percent and is
//! undefined on zero actuals; rows with zero actuals must be excluded
//! upstream (the exclusion count is carried in score reports). The
//! asymmetric squared error scales over-predictions by `lambda_over`,
//! reflecting response costs that differ by error sign.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Mse,
    Rmse,
    Mae,
    Mape,
    AsymmetricSe { lambda_over: f64 },
}

impl MetricKind {
    pub fn name(&self) -> String {
        match self {
            MetricKind::Mse => "mse".into(),
            MetricKind::Rmse => "rmse".into(),
            MetricKind::Mae => "mae".into(),
            MetricKind::Mape => "mape".into(),
            MetricKind::AsymmetricSe { lambda_over } => format!("asymmetric_se({lambda_over})"),
        }
    }
}

/// Scores aligned predictions against actuals.
pub fn evaluate_metric(
    predictions: &[f64],
    actuals: &[f64],
    kind: &MetricKind,
) -> Result<f64, EvalError> {
    if predictions.len() != actuals.len() {
        return Err(EvalError::LengthMismatch {
            preds: predictions.len(),
            actuals: actuals.len(),
        });
    }
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if let MetricKind::AsymmetricSe { lambda_over } = kind {
        if !(lambda_over.is_finite() && *lambda_over > 0.0) {
            return Err(EvalError::InvalidMetric(format!(
                "lambda_over must be finite and positive, got {lambda_over}"
            )));
        }
    }
    let n = predictions.len() as f64;
    let pairs = predictions.iter().zip(actuals.iter());
    let score = match kind {
        MetricKind::Mse => pairs.map(|(p, a)| (p - a) * (p - a)).sum::<f64>() / n,
        MetricKind::Rmse => (evaluate_metric(predictions, actuals, &MetricKind::Mse)?).sqrt(),
        MetricKind::Mae => pairs.map(|(p, a)| (p - a).abs()).sum::<f64>() / n,
        MetricKind::Mape => {
            let mut total = 0.0;
            for (index, (p, a)) in pairs.enumerate() {
                if *a == 0.0 {
                    return Err(EvalError::ZeroActualInMape { index });
                }
                total += ((p - a) / a).abs();
            }
            total / n * 100.0
        }
        MetricKind::AsymmetricSe { lambda_over } => {
            pairs
                .map(|(p, a)| {
                    let e = p - a;
                    let w = if e > 0.0 { *lambda_over } else { 1.0 };
                    w * e * e
                })
                .sum::<f64>()
                / n
        }
    };
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ape_is_scale_free() {
        // Predicting 150 for 100 and 15,000 for 10,000 both score 50%.
        let small = evaluate_metric(&[150.0], &[100.0], &MetricKind::Mape).unwrap();
        let large = evaluate_metric(&[15_000.0], &[10_000.0], &MetricKind::Mape).unwrap();
        assert_eq!(small, 50.0);
        assert_eq!(large, 50.0);
    }

    #[test]
    fn under_prediction_ape_is_capped_at_100() {
        assert_eq!(
            evaluate_metric(&[0.0], &[100.0], &MetricKind::Mape).unwrap(),
            100.0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let actual = rng.gen_range(1.0..10_000.0);
            let pred = rng.gen_range(0.0..=actual);
            let ape = evaluate_metric(&[pred], &[actual], &MetricKind::Mape).unwrap();
            assert!(ape <= 100.0 + 1e-9);
        }
    }

    #[test]
    fn asymmetric_loss_fixture() {
        // Errors +2 and -2 with lambda_over = 2: mean(2*4, 4) = 6.
        let score = evaluate_metric(
            &[3.0, 1.0],
            &[1.0, 3.0],
            &MetricKind::AsymmetricSe { lambda_over: 2.0 },
        )
        .unwrap();
        assert_eq!(score, 6.0);
    }

    #[test]
    fn perfect_predictions_score_zero_under_every_metric() {
        let v = [4.0, 5.0, 6.5];
        for kind in [
            MetricKind::Mse,
            MetricKind::Rmse,
            MetricKind::Mae,
            MetricKind::Mape,
            MetricKind::AsymmetricSe { lambda_over: 3.0 },
        ] {
            assert_eq!(evaluate_metric(&v, &v, &kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn rmse_squared_equals_mse() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let n = rng.gen_range(1..40);
            let preds: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let actuals: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let mse = evaluate_metric(&preds, &actuals, &MetricKind::Mse).unwrap();
            let rmse = evaluate_metric(&preds, &actuals, &MetricKind::Rmse).unwrap();
            assert!((rmse * rmse - mse).abs() <= 1e-12 * mse.max(1.0));
        }
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            evaluate_metric(&[1.0], &[1.0, 2.0], &MetricKind::Mse),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(
            evaluate_metric(&[], &[], &MetricKind::Mae),
            Err(EvalError::EmptyInput)
        ));
        assert!(matches!(
            evaluate_metric(&[1.0, 2.0], &[1.0, 0.0], &MetricKind::Mape),
            Err(EvalError::ZeroActualInMape { index: 1 })
        ));
    }

    #[test]
    fn asymmetric_multiplier_must_be_finite_positive() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                evaluate_metric(&[1.0], &[2.0], &MetricKind::AsymmetricSe { lambda_over: bad }),
                Err(EvalError::InvalidMetric(_))
            ));
        }
    }

    #[test]
    fn mse_weighs_large_errors_more_than_mae() {
        let preds = [0.0, 0.0];
        let actuals = [1.0, 9.0];
        let mse = evaluate_metric(&preds, &actuals, &MetricKind::Mse).unwrap();
        let mae = evaluate_metric(&preds, &actuals, &MetricKind::Mae).unwrap();
        assert_eq!(mae, 5.0);
        assert_eq!(mse, 41.0);
    }
}

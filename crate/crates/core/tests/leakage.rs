//! End-to-end anti-leakage checks: scrambling every input after an
//! issuance cutoff must leave engineered features, benchmark predictions,
//! and fitted coefficients exactly unchanged.

use fdf_testkit::panels::{feature_driven_inputs, period, scramble_after};

use fdf_core::evaluation::{
    expanding_splits, fit_panel_estimator, predict_panel_rows, sliding_splits,
};
use fdf_core::models::{BenchmarkSpec, Estimator, ModelSpec};
use fdf_core::period::PeriodRange;

fn model_zoo(seed: u64) -> Vec<Estimator> {
    vec![
        Estimator::new(ModelSpec::Ridge { lambda: 0.7 }, seed),
        Estimator::new(
            ModelSpec::Lasso {
                lambda: 0.05,
                tol: 1e-8,
                max_iter: 10_000,
            },
            seed,
        ),
        Estimator::new(
            ModelSpec::Tree {
                max_depth: 4,
                min_samples_leaf: 2,
            },
            seed,
        ),
        Estimator::new(
            ModelSpec::Forest {
                n_trees: 6,
                m_features: None,
                bootstrap: true,
                max_depth: 4,
                min_samples_leaf: 2,
            },
            seed,
        ),
        Estimator::new(
            ModelSpec::Gbm {
                n_rounds: 10,
                learning_rate: 0.3,
                max_depth: 2,
            },
            seed,
        ),
    ]
}

fn benchmark_zoo() -> Vec<BenchmarkSpec> {
    vec![
        BenchmarkSpec::Lag { n: 1 },
        BenchmarkSpec::Lag { n: 12 },
        BenchmarkSpec::ExpandingMean,
        BenchmarkSpec::Ewm { n: 8 },
        BenchmarkSpec::RollingMean { n: 12 },
    ]
}

#[test]
fn engineered_features_ignore_post_issuance_data() {
    let inputs = feature_driven_inputs(21, 3, 48);
    for h in [1u32, 3] {
        let clean = inputs.build_panel(h, true);
        let cutoff = period("2017-06");
        let scrambled = scramble_after(&inputs, cutoff).build_panel(h, true);

        for row in 0..clean.n_rows() {
            let (_, t) = clean.row_key(row);
            let issuance = t.add_months(-(h as i64));
            if issuance > cutoff {
                continue;
            }
            for name in clean.observable_columns() {
                let a = clean.column(&name).unwrap().values()[row];
                let b = scrambled.column(&name).unwrap().values()[row];
                assert_eq!(a, b, "column {name} leaked at row {row} (h={h})");
            }
        }
    }
}

#[test]
fn benchmark_predictions_ignore_post_issuance_data() {
    let inputs = feature_driven_inputs(22, 3, 48);
    for h in [1u32, 3] {
        let clean = inputs.build_panel(h, true);
        let cutoff = period("2017-06");
        let scrambled = scramble_after(&inputs, cutoff).build_panel(h, true);
        let rows: Vec<usize> = (0..clean.n_rows())
            .filter(|&row| {
                let (_, t) = clean.row_key(row);
                t.add_months(-(h as i64)) <= cutoff
            })
            .collect();
        for spec in benchmark_zoo() {
            if !spec.feasible_at_horizon(h) {
                continue;
            }
            let estimator = Estimator::new(ModelSpec::Benchmark { spec: spec.clone() }, 0);
            let train = PeriodRange::new(clean.range().start, cutoff).unwrap();
            let model = fit_panel_estimator(&clean, &estimator, &train, None).unwrap();
            let a = predict_panel_rows(&clean, &model, &rows).unwrap();
            let b = predict_panel_rows(&scrambled, &model, &rows).unwrap();
            assert_eq!(a, b, "benchmark {spec:?} leaked at h={h}");
        }
    }
}

#[test]
fn fitted_coefficients_ignore_post_train_data_under_both_splitters() {
    let inputs = feature_driven_inputs(23, 3, 48);
    let h = 1u32;
    let clean = inputs.build_panel(h, true);
    let plans = [
        expanding_splits(clean.range(), 3, 24).unwrap(),
        sliding_splits(clean.range(), 3, 24).unwrap(),
    ];
    for plan in &plans {
        for fold in &plan.folds {
            let cutoff = fold.train.end;
            let scrambled = scramble_after(&inputs, cutoff).build_panel(h, true);
            for estimator in model_zoo(42) {
                let a = fit_panel_estimator(&clean, &estimator, &fold.train, None).unwrap();
                let b = fit_panel_estimator(&scrambled, &estimator, &fold.train, None).unwrap();
                assert_eq!(
                    serde_json::to_string(&a).unwrap(),
                    serde_json::to_string(&b).unwrap(),
                    "{:?} leaked beyond {}",
                    estimator.spec,
                    cutoff
                );
            }
        }
    }
}

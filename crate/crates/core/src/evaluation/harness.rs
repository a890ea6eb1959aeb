//! Fitting and predicting estimators over a panel, plus the selection and
//! holdout protocols built on top.
//!
//! Supervised models train on rows whose target period lies in the
//! training range, whose target is observed, and whose model columns are
//! all present; rows failing the column test at prediction time yield no
//! prediction and fall out of the common support. Features are
//! standardized inside each fit with statistics from that fit's own
//! training rows, so nothing outside the training range can reach the
//! fitted coefficients. Benchmarks ignore fitting entirely and read the
//! masked target history up to each row's issuance period.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::{predict_benchmark, BenchmarkSpec, Estimator, FittedModel, ModelSpec};
use crate::panel::{PanelTable, TransformState};
use crate::period::{Period, PeriodRange};

use super::report::{OmittedModel, Partition, ScoreEntry, ScoreReport, SeriesBlock};
use super::score::{average_ranks, score_models};
use super::splits::SplitPlan;
use super::{EvalError, MetricKind};

/// A fitted model bound to the panel interface it was trained through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PanelModel {
    Benchmark {
        spec: BenchmarkSpec,
    },
    Supervised {
        columns: Vec<String>,
        /// Per-column (mean, sd) from the fit's training rows.
        standardization: Vec<(f64, f64)>,
        /// Target (mean, sd) from the fit's training rows; supervised
        /// models train on the z-scored target and predictions are scaled
        /// back (keeps penalty strengths and convergence tolerances
        /// meaningful regardless of the target's magnitude).
        target_standardization: (f64, f64),
        model: FittedModel,
    },
}

impl PanelModel {
    pub fn nonzero_parameters(&self) -> u64 {
        match self {
            PanelModel::Benchmark { .. } => 0,
            PanelModel::Supervised { model, .. } => model.nonzero_parameters(),
        }
    }
}

/// Fits one estimator on the panel rows whose target period falls in
/// `train`. `columns` restricts the model inputs; the default is every
/// issuance-observable column.
pub fn fit_panel_estimator(
    panel: &PanelTable,
    estimator: &Estimator,
    train: &PeriodRange,
    columns: Option<&[String]>,
) -> Result<PanelModel, EvalError> {
    if let ModelSpec::Benchmark { spec } = &estimator.spec {
        spec.validate()?;
        return Ok(PanelModel::Benchmark { spec: spec.clone() });
    }

    let column_names: Vec<String> = match columns {
        Some(c) => c.to_vec(),
        None => panel.observable_columns(),
    };
    let mut column_values = Vec::with_capacity(column_names.len());
    for name in &column_names {
        let col = panel
            .column(name)
            .ok_or_else(|| EvalError::UnknownColumn(name.clone()))?;
        column_values.push(col.values());
    }

    let mut rows = Vec::new();
    for row in 0..panel.n_rows() {
        let (_, t) = panel.row_key(row);
        if !train.contains(&t) || panel.target()[row].is_none() {
            continue;
        }
        if column_values.iter().any(|col| col[row].is_none()) {
            continue;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(EvalError::Model(crate::models::ModelError::EmptyTrainingSet));
    }

    let n = rows.len();
    let p = column_names.len();
    let mut x = Array2::<f64>::zeros((n, p));
    for (i, &row) in rows.iter().enumerate() {
        for (j, col) in column_values.iter().enumerate() {
            x[(i, j)] = col[row].expect("filtered complete rows");
        }
    }
    let mut y = Array1::from_shape_fn(n, |i| panel.target()[rows[i]].expect("observed targets"));

    // Standardize with the fit's own training statistics.
    let mut standardization = Vec::with_capacity(p);
    for j in 0..p {
        let col = x.column(j);
        let mean = col.sum() / n as f64;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
        standardization.push((mean, sd));
    }
    for (j, (mean, sd)) in standardization.iter().enumerate() {
        for i in 0..n {
            x[(i, j)] = if *sd == 0.0 { 0.0 } else { (x[(i, j)] - mean) / sd };
        }
    }
    // Regression families train on the z-scored target; logistic needs the
    // raw 0/1 labels and gravity strictly positive flows, so both keep the
    // target as-is (encoded as the identity scaling (0, 0)).
    let scaled_target = !matches!(
        estimator.spec,
        ModelSpec::Logistic { .. } | ModelSpec::Gravity
    );
    let target_standardization = if scaled_target {
        let y_mean = y.sum() / n as f64;
        let y_sd =
            (y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n as f64).sqrt();
        let y_scale = if y_sd == 0.0 { 1.0 } else { y_sd };
        y.mapv_inplace(|v| (v - y_mean) / y_scale);
        (y_mean, y_sd)
    } else {
        (0.0, 0.0)
    };

    let model = estimator.fit(x.view(), y.view())?;
    Ok(PanelModel::Supervised {
        columns: column_names,
        standardization,
        target_standardization,
        model,
    })
}

/// Predictions for the given panel rows; `None` where the model cannot
/// predict (incomplete features, or no observable history for a
/// benchmark).
pub fn predict_panel_rows(
    panel: &PanelTable,
    model: &PanelModel,
    rows: &[usize],
) -> Result<Vec<Option<f64>>, EvalError> {
    let horizon = panel.task().horizon as usize;
    let n_periods = panel.range().len();
    match model {
        PanelModel::Benchmark { spec } => rows
            .iter()
            .map(|&row| {
                let region = row / n_periods;
                let t_off = row % n_periods;
                if t_off < horizon {
                    return Ok(None);
                }
                let history = &panel.target_series(region)[..=t_off - horizon];
                predict_benchmark(history, spec, horizon as u32).map_err(EvalError::from)
            })
            .collect(),
        PanelModel::Supervised {
            columns,
            standardization,
            target_standardization,
            model,
        } => {
            let mut column_values = Vec::with_capacity(columns.len());
            for name in columns {
                let col = panel
                    .column(name)
                    .ok_or_else(|| EvalError::UnknownColumn(name.clone()))?;
                column_values.push(col.values());
            }
            let (y_mean, y_sd) = *target_standardization;
            let y_scale = if y_sd == 0.0 { 1.0 } else { y_sd };
            let mut features = Array1::<f64>::zeros(columns.len());
            rows.iter()
                .map(|&row| {
                    for (j, col) in column_values.iter().enumerate() {
                        match col[row] {
                            Some(v) => {
                                let (mean, sd) = standardization[j];
                                features[j] = if sd == 0.0 { 0.0 } else { (v - mean) / sd };
                            }
                            None => return Ok(None),
                        }
                    }
                    Ok(model
                        .predict_row(features.view())
                        .map(|z| y_mean + y_scale * z))
                })
                .collect()
        }
    }
}

fn rows_in(panel: &PanelTable, range: &PeriodRange) -> Vec<usize> {
    (0..panel.n_rows())
        .filter(|&row| {
            let (_, t) = panel.row_key(row);
            range.contains(&t)
        })
        .collect()
}

/// Per-spec cross-validation outcome.
#[derive(Debug, Clone)]
pub struct CvSpecResult {
    pub estimator: Estimator,
    pub fold_scores: Vec<Option<f64>>,
    pub mean_score: Option<f64>,
    /// Nonzero fitted parameters summed over folds (sparser wins ties).
    pub nonzero_parameters: u64,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub best_index: usize,
    pub results: Vec<CvSpecResult>,
}

impl CvOutcome {
    pub fn best(&self) -> &CvSpecResult {
        &self.results[self.best_index]
    }
}

/// Trains every spec on every fold and scores it on the fold's validation
/// rows under common-support scoring across the grid. The winner has the
/// lowest mean validation score; ties prefer fewer nonzero parameters,
/// then the lexicographically smallest spec. `columns` restricts the
/// model inputs (default: every issuance-observable column).
pub fn cross_validate(
    grid: &[Estimator],
    panel: &PanelTable,
    plan: &SplitPlan,
    metric: &MetricKind,
    columns: Option<&[String]>,
) -> Result<CvOutcome, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n_folds = plan.folds.len();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|s| (0..n_folds).map(move |f| (s, f)))
        .collect();
    let fitted: Vec<Result<PanelModel, String>> = jobs
        .par_iter()
        .map(|&(s, f)| {
            fit_panel_estimator(panel, &grid[s], &plan.folds[f].train, columns)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut results: Vec<CvSpecResult> = grid
        .iter()
        .map(|estimator| CvSpecResult {
            estimator: estimator.clone(),
            fold_scores: vec![None; n_folds],
            mean_score: None,
            nonzero_parameters: 0,
            failures: Vec::new(),
        })
        .collect();

    for (fold_index, fold) in plan.folds.iter().enumerate() {
        let val_rows = rows_in(panel, &fold.val);
        let actuals: Vec<Option<f64>> = val_rows.iter().map(|&r| panel.target()[r]).collect();

        let mut fold_preds: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
        let mut spec_of_key: BTreeMap<String, usize> = BTreeMap::new();
        for (spec_index, result) in results.iter_mut().enumerate() {
            let job = spec_index * n_folds + fold_index;
            match &fitted[job] {
                Err(reason) => result
                    .failures
                    .push(format!("fold {fold_index}: {reason}")),
                Ok(model) => {
                    result.nonzero_parameters += model.nonzero_parameters();
                    let preds = predict_panel_rows(panel, model, &val_rows)?;
                    if preds.iter().all(|p| p.is_none()) {
                        result
                            .failures
                            .push(format!("fold {fold_index}: produced no predictions"));
                    } else {
                        let key = format!("{spec_index:04}");
                        spec_of_key.insert(key.clone(), spec_index);
                        fold_preds.insert(key, preds);
                    }
                }
            }
        }

        if fold_preds.is_empty() {
            continue;
        }
        match super::score::common_support(&fold_preds, &actuals) {
            Err(EvalError::NoCommonSupport) => {
                for spec_index in spec_of_key.values() {
                    results[*spec_index]
                        .failures
                        .push(format!("fold {fold_index}: no common support"));
                }
            }
            Err(other) => return Err(other),
            Ok(mut support) => {
                if matches!(metric, MetricKind::Mape) {
                    support.retain(|&i| actuals[i] != Some(0.0));
                }
                for (key, preds) in &fold_preds {
                    let spec_index = spec_of_key[key];
                    if support.is_empty() {
                        results[spec_index]
                            .failures
                            .push(format!("fold {fold_index}: no scorable rows"));
                        continue;
                    }
                    let p: Vec<f64> = support.iter().map(|&i| preds[i].unwrap()).collect();
                    let a: Vec<f64> = support.iter().map(|&i| actuals[i].unwrap()).collect();
                    let score = super::evaluate_metric(&p, &a, metric)?;
                    results[spec_index].fold_scores[fold_index] = Some(score);
                }
            }
        }
    }

    for result in &mut results {
        if result.failures.is_empty() && result.fold_scores.iter().all(|s| s.is_some()) {
            let sum: f64 = result.fold_scores.iter().map(|s| s.unwrap()).sum();
            result.mean_score = Some(sum / n_folds as f64);
        }
    }

    let best_index = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.mean_score.is_some())
        .min_by(|(_, a), (_, b)| {
            a.mean_score
                .unwrap()
                .total_cmp(&b.mean_score.unwrap())
                .then_with(|| a.nonzero_parameters.cmp(&b.nonzero_parameters))
                .then_with(|| a.estimator.spec.sort_key().cmp(&b.estimator.spec.sort_key()))
        })
        .map(|(i, _)| i);
    match best_index {
        Some(best_index) => Ok(CvOutcome {
            best_index,
            results,
        }),
        None => Err(EvalError::AllSpecsFailed {
            reasons: results
                .iter()
                .flat_map(|r| r.failures.iter().cloned())
                .collect(),
        }),
    }
}

/// Mean validation score of a single estimator restricted to `columns`;
/// `Err(reason)` when any fold cannot be fit or scored.
fn cv_mean_score(
    panel: &PanelTable,
    estimator: &Estimator,
    plan: &SplitPlan,
    metric: &MetricKind,
    columns: &[String],
) -> Result<f64, String> {
    let mut total = 0.0;
    for (fold_index, fold) in plan.folds.iter().enumerate() {
        let model = fit_panel_estimator(panel, estimator, &fold.train, Some(columns))
            .map_err(|e| format!("fold {fold_index}: {e}"))?;
        let val_rows = rows_in(panel, &fold.val);
        let preds = predict_panel_rows(panel, &model, &val_rows)
            .map_err(|e| format!("fold {fold_index}: {e}"))?;
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for (&row, pred) in val_rows.iter().zip(&preds) {
            if let (Some(p), Some(a)) = (pred, panel.target()[row]) {
                if matches!(metric, MetricKind::Mape) && a == 0.0 {
                    continue;
                }
                pairs.push((*p, a));
            }
        }
        if pairs.is_empty() {
            return Err(format!("fold {fold_index}: no scorable rows"));
        }
        let p: Vec<f64> = pairs.iter().map(|x| x.0).collect();
        let a: Vec<f64> = pairs.iter().map(|x| x.1).collect();
        total += super::evaluate_metric(&p, &a, metric).map_err(|e| e.to_string())?;
    }
    Ok(total / plan.folds.len() as f64)
}

/// Greedy forward feature selection: repeatedly add the candidate column
/// that most improves the mean validation score, stopping when nothing
/// improves or `max_features` is reached. Ties prefer the alphabetically
/// first column. Each candidate set is scored on its own predictable
/// rows; on an imputed panel every candidate covers the same rows.
pub fn forward_select(
    panel: &PanelTable,
    estimator: &Estimator,
    candidates: &[String],
    plan: &SplitPlan,
    metric: &MetricKind,
    max_features: usize,
) -> Result<Vec<String>, EvalError> {
    let mut pool: Vec<String> = candidates.to_vec();
    pool.sort();
    pool.dedup();
    for name in &pool {
        if panel.column(name).is_none() {
            return Err(EvalError::UnknownColumn(name.clone()));
        }
    }

    let mut selected: Vec<String> = Vec::new();
    let mut current = cv_mean_score(panel, estimator, plan, metric, &selected)
        .unwrap_or(f64::INFINITY);
    while selected.len() < max_features {
        let remaining: Vec<&String> = pool.iter().filter(|c| !selected.contains(c)).collect();
        if remaining.is_empty() {
            break;
        }
        let scored: Vec<(usize, Result<f64, String>)> = remaining
            .par_iter()
            .enumerate()
            .map(|(i, candidate)| {
                let mut columns = selected.clone();
                columns.push((*candidate).clone());
                columns.sort();
                (i, cv_mean_score(panel, estimator, plan, metric, &columns))
            })
            .collect();
        let mut best: Option<(f64, usize)> = None;
        for (i, outcome) in scored {
            if let Ok(score) = outcome {
                // Strict `<` keeps the alphabetically first candidate on ties
                // (remaining is sorted).
                if best.is_none_or(|(b, _)| score < b) {
                    best = Some((score, i));
                }
            }
        }
        match best {
            Some((score, i)) if score < current => {
                selected.push(remaining[i].clone());
                current = score;
            }
            _ => break,
        }
    }
    Ok(selected)
}

/// Fits every model on rows with target period `<= train_end` and scores
/// both partitions on the global common support, producing the full
/// report: overall and per-region scores, average-tie ranks, structural
/// omissions, and raw-scale series for rendering.
pub fn holdout_evaluate(
    panel: &PanelTable,
    models: &[(String, Estimator)],
    train_end: Period,
    metric: &MetricKind,
    transform: &TransformState,
    seed: u64,
) -> Result<ScoreReport, EvalError> {
    let range = panel.range();
    if !range.contains(&train_end) {
        return Err(EvalError::TrainEndOutOfRange(train_end.to_string()));
    }
    if train_end == range.end {
        return Err(EvalError::EmptyTestPartition);
    }
    let horizon = panel.task().horizon;
    let train_range = PeriodRange::new(range.start, train_end).expect("checked contains");
    let test_range = PeriodRange::new(train_end.succ(), range.end).expect("checked non-empty");

    let mut omitted = Vec::new();
    let mut active: Vec<(String, Estimator)> = Vec::new();
    for (name, estimator) in models {
        if let ModelSpec::Benchmark { spec } = &estimator.spec {
            if !spec.feasible_at_horizon(horizon) {
                omitted.push(OmittedModel {
                    model: name.clone(),
                    horizon,
                    reason: "lag shorter than horizon".into(),
                });
                continue;
            }
        }
        active.push((name.clone(), estimator.clone()));
    }
    if active.is_empty() {
        return Err(EvalError::EmptyInput);
    }

    let fitted: Vec<Result<PanelModel, EvalError>> = active
        .par_iter()
        .map(|(_, estimator)| fit_panel_estimator(panel, estimator, &train_range, None))
        .collect();

    let all_rows: Vec<usize> = (0..panel.n_rows()).collect();
    let mut predictions: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for ((name, _), fit) in active.iter().zip(fitted) {
        let model = fit?;
        let preds = predict_panel_rows(panel, &model, &all_rows)?;
        predictions.insert(name.clone(), preds);
    }

    // Move predictions and actuals back to the raw scale when the
    // transform is invertible; otherwise score on the transformed scale.
    let n_periods = range.len();
    let to_scoring_scale = |row: usize, v: f64| -> Result<f64, EvalError> {
        if transform.is_invertible() {
            Ok(transform.inverse(row / n_periods, v)?)
        } else {
            Ok(v)
        }
    };
    let mut actuals: Vec<Option<f64>> = Vec::with_capacity(panel.n_rows());
    for (row, v) in panel.target().iter().enumerate() {
        actuals.push(match v {
            Some(v) => Some(to_scoring_scale(row, *v)?),
            None => None,
        });
    }
    for preds in predictions.values_mut() {
        for (row, p) in preds.iter_mut().enumerate() {
            if let Some(v) = p {
                let mapped = to_scoring_scale(row, *v)?;
                // A prediction that overflows the inverse transform is no
                // prediction at all (and JSON cannot carry infinities).
                *p = mapped.is_finite().then_some(mapped);
            }
        }
    }
    let region_labels: Vec<String> = (0..panel.n_rows())
        .map(|row| panel.regions()[row / n_periods].to_string())
        .collect();

    let mut entries = Vec::new();
    let mut mape_excluded = 0;
    for (partition, part_range) in [
        (Partition::Train, &train_range),
        (Partition::Test, &test_range),
    ] {
        let rows = rows_in(panel, part_range);
        let part_preds: BTreeMap<String, Vec<Option<f64>>> = predictions
            .iter()
            .map(|(name, preds)| {
                (
                    name.clone(),
                    rows.iter().map(|&r| preds[r]).collect::<Vec<_>>(),
                )
            })
            .collect();
        let part_actuals: Vec<Option<f64>> = rows.iter().map(|&r| actuals[r]).collect();
        let part_regions: Vec<String> =
            rows.iter().map(|&r| region_labels[r].clone()).collect();
        let scores = score_models(&part_preds, &part_actuals, &part_regions, metric)?;
        mape_excluded += scores.mape_excluded;

        let overall_flat: BTreeMap<String, f64> = scores
            .overall
            .iter()
            .map(|(m, (s, _))| (m.clone(), *s))
            .collect();
        let overall_ranks = average_ranks(&overall_flat);
        for (model, (score, support)) in &scores.overall {
            entries.push(ScoreEntry {
                model: model.clone(),
                horizon,
                region: None,
                partition,
                score: *score,
                support: *support,
                rank: overall_ranks[model],
            });
        }
        for (region, model_scores) in &scores.per_region {
            let flat: BTreeMap<String, f64> = model_scores
                .iter()
                .map(|(m, (s, _))| (m.clone(), *s))
                .collect();
            let ranks = average_ranks(&flat);
            for (model, (score, support)) in model_scores {
                entries.push(ScoreEntry {
                    model: model.clone(),
                    horizon,
                    region: Some(region.clone()),
                    partition,
                    score: *score,
                    support: *support,
                    rank: ranks[model],
                });
            }
        }
    }

    let series = (0..panel.n_regions())
        .map(|region| {
            let rows: Vec<usize> = (0..n_periods).map(|t| region * n_periods + t).collect();
            SeriesBlock {
                horizon,
                region: panel.regions()[region].to_string(),
                actual: rows.iter().map(|&r| actuals[r]).collect(),
                predictions: predictions
                    .iter()
                    .map(|(name, preds)| {
                        (name.clone(), rows.iter().map(|&r| preds[r]).collect())
                    })
                    .collect(),
            }
        })
        .collect();

    let mut report = ScoreReport {
        schema_version: ScoreReport::SCHEMA_VERSION,
        metric: *metric,
        seed,
        horizons: vec![horizon],
        models: Vec::new(),
        periods: range,
        train_range,
        test_range,
        entries,
        omitted,
        mape_excluded,
        series,
        warnings: Vec::new(),
    };
    report.sort_entries();
    report.models = report.display_order();
    Ok(report)
}

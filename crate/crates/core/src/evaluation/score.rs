//! Common-support scoring and per-region ranking.
//!
//! To keep scores comparable, every model is scored on the identical
//! observation set: the indices where all models produced a prediction and
//! the actual value is observed. Per-region scores restrict that global
//! support to the region's rows.

use std::collections::BTreeMap;

use super::{evaluate_metric, EvalError, MetricKind};

/// Indices where every model predicted and the actual is observed. The
/// result is a set intersection, so model enumeration order is irrelevant.
pub fn common_support(
    predictions: &BTreeMap<String, Vec<Option<f64>>>,
    actuals: &[Option<f64>],
) -> Result<Vec<usize>, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    for preds in predictions.values() {
        if preds.len() != actuals.len() {
            return Err(EvalError::LengthMismatch {
                preds: preds.len(),
                actuals: actuals.len(),
            });
        }
    }
    let support: Vec<usize> = (0..actuals.len())
        .filter(|&i| {
            actuals[i].is_some() && predictions.values().all(|preds| preds[i].is_some())
        })
        .collect();
    if support.is_empty() {
        return Err(EvalError::NoCommonSupport);
    }
    Ok(support)
}

/// Scores per model, overall and by region, on one common-support set.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionScores {
    /// model -> (score, support size)
    pub overall: BTreeMap<String, (f64, usize)>,
    /// region -> model -> (score, support size)
    pub per_region: BTreeMap<String, BTreeMap<String, (f64, usize)>>,
    /// Rows excluded because MAPE is undefined on zero actuals.
    pub mape_excluded: usize,
    pub support: Vec<usize>,
}

/// Scores every model on the shared support. `regions[i]` labels
/// observation `i`; per-region scores are the global support restricted to
/// each region's rows.
pub fn score_models(
    predictions: &BTreeMap<String, Vec<Option<f64>>>,
    actuals: &[Option<f64>],
    regions: &[String],
    kind: &MetricKind,
) -> Result<PartitionScores, EvalError> {
    if regions.len() != actuals.len() {
        return Err(EvalError::LengthMismatch {
            preds: regions.len(),
            actuals: actuals.len(),
        });
    }
    let mut support = common_support(predictions, actuals)?;
    let mut mape_excluded = 0;
    if matches!(kind, MetricKind::Mape) {
        let before = support.len();
        support.retain(|&i| actuals[i] != Some(0.0));
        mape_excluded = before - support.len();
        if support.is_empty() {
            return Err(EvalError::NoCommonSupport);
        }
    }

    let actual_at = |i: usize| actuals[i].expect("support guarantees observed actuals");
    let mut overall = BTreeMap::new();
    let mut per_region: BTreeMap<String, BTreeMap<String, (f64, usize)>> = BTreeMap::new();
    for (model, preds) in predictions {
        let p: Vec<f64> = support.iter().map(|&i| preds[i].unwrap()).collect();
        let a: Vec<f64> = support.iter().map(|&i| actual_at(i)).collect();
        let score = evaluate_metric(&p, &a, kind)?;
        overall.insert(model.clone(), (score, support.len()));

        let mut by_region: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for &i in &support {
            let slot = by_region.entry(regions[i].as_str()).or_default();
            slot.0.push(preds[i].unwrap());
            slot.1.push(actual_at(i));
        }
        for (region, (p, a)) in by_region {
            let score = evaluate_metric(&p, &a, kind)?;
            per_region
                .entry(region.to_string())
                .or_default()
                .insert(model.clone(), (score, p.len()));
        }
    }
    Ok(PartitionScores {
        overall,
        per_region,
        mape_excluded,
        support,
    })
}

/// Ascending ranks 1..M with ties sharing the average of their positional
/// ranks.
pub fn average_ranks(scores: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let mut ordered: Vec<(&String, f64)> = scores.iter().map(|(k, v)| (k, *v)).collect();
    ordered.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let mut ranks = BTreeMap::new();
    let mut i = 0;
    while i < ordered.len() {
        let mut j = i;
        while j + 1 < ordered.len() && ordered[j + 1].1 == ordered[i].1 {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for entry in &ordered[i..=j] {
            ranks.insert(entry.0.clone(), rank);
        }
        i = j + 1;
    }
    ranks
}

/// Model ranks within every region of a scored partition.
pub fn rank_by_region(scores: &PartitionScores) -> BTreeMap<String, BTreeMap<String, f64>> {
    scores
        .per_region
        .iter()
        .map(|(region, model_scores)| {
            let flat: BTreeMap<String, f64> = model_scores
                .iter()
                .map(|(m, (score, _))| (m.clone(), *score))
                .collect();
            (region.clone(), average_ranks(&flat))
        })
        .collect()
}

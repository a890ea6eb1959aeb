//! Target transforms and alert-label derivation.

use serde::{Deserialize, Serialize};

use crate::period::PeriodRange;

use super::{PanelError, PanelTable, TargetTransform};

/// Categorical movement of the target relative to the previous period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlertLabel {
    LargeIncrease,
    LittleChange,
    LargeDecrease,
}

impl AlertLabel {
    /// Numeric code used when labels stand in for a regression target.
    pub fn code(self) -> f64 {
        match self {
            AlertLabel::LargeIncrease => 1.0,
            AlertLabel::LittleChange => 0.0,
            AlertLabel::LargeDecrease => -1.0,
        }
    }
}

/// Everything needed to map model outputs back to the raw target scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformState {
    Identity,
    Log1p,
    /// Per-region `(mean, sd)` computed from training-range rows only.
    PerRegionZscore { stats: Vec<(f64, f64)> },
    PctChange,
    AlertLabels { threshold: f64 },
}

impl TransformState {
    /// Maps a prediction for `region` back to the raw target scale.
    /// Percentage changes and alert labels have no pointwise inverse.
    pub fn inverse(&self, region: usize, value: f64) -> Result<f64, PanelError> {
        match self {
            TransformState::Identity => Ok(value),
            TransformState::Log1p => Ok(value.exp_m1()),
            TransformState::PerRegionZscore { stats } => {
                let (mean, sd) = stats[region];
                Ok(value * sd + mean)
            }
            TransformState::PctChange => Err(PanelError::NonInvertibleTransform("pct_change")),
            TransformState::AlertLabels { .. } => {
                Err(PanelError::NonInvertibleTransform("alert_labels"))
            }
        }
    }

    pub fn is_invertible(&self) -> bool {
        matches!(
            self,
            TransformState::Identity
                | TransformState::Log1p
                | TransformState::PerRegionZscore { .. }
        )
    }
}

/// Relative change from `prev` to `cur`; undefined when either is missing
/// or the baseline is zero.
fn pct_change(prev: Option<f64>, cur: Option<f64>) -> Option<f64> {
    match (prev, cur) {
        (Some(p), Some(c)) if p != 0.0 => Some((c - p) / p),
        _ => None,
    }
}

fn classify(pct: f64, threshold: f64) -> AlertLabel {
    // The boundary is inclusive into LittleChange.
    if pct > threshold {
        AlertLabel::LargeIncrease
    } else if pct < -threshold {
        AlertLabel::LargeDecrease
    } else {
        AlertLabel::LittleChange
    }
}

impl PanelTable {
    /// Rewrites the target in place per `transform` and returns the state
    /// needed to invert predictions. Z-scores and percentage changes
    /// require a training range; z-score statistics use only rows whose
    /// target period falls inside it.
    pub fn transform_target(
        &mut self,
        transform: &TargetTransform,
        train_range: Option<&PeriodRange>,
    ) -> Result<TransformState, PanelError> {
        match transform {
            TargetTransform::Identity => Ok(TransformState::Identity),
            TargetTransform::Log1p => {
                for v in self.target_mut().iter_mut().flatten() {
                    *v = v.ln_1p();
                }
                Ok(TransformState::Log1p)
            }
            TargetTransform::PerRegionZscore => {
                let train = train_range.ok_or(PanelError::MissingTrainRange)?;
                let n_periods = self.range().len();
                let periods: Vec<crate::period::Period> = self.range().iter().collect();
                let mut stats = Vec::with_capacity(self.n_regions());
                for r in 0..self.n_regions() {
                    let cells: Vec<f64> = self
                        .target_series(r)
                        .iter()
                        .zip(&periods)
                        .filter(|(_, p)| train.contains(p))
                        .filter_map(|(v, _)| *v)
                        .collect();
                    stats.push(super::features::population_stats(&cells));
                }
                let target = self.target_mut();
                for (row, v) in target.iter_mut().enumerate() {
                    if let Some(x) = v {
                        let (mean, sd) = stats[row / n_periods];
                        *x = if sd == 0.0 { 0.0 } else { (*x - mean) / sd };
                    }
                }
                Ok(TransformState::PerRegionZscore { stats })
            }
            TargetTransform::PctChange => {
                train_range.ok_or(PanelError::MissingTrainRange)?;
                let n_periods = self.range().len();
                let n_regions = self.n_regions();
                let target = self.target_mut();
                let raw = target.clone();
                for r in 0..n_regions {
                    for t in 0..n_periods {
                        let prev = if t == 0 { None } else { raw[r * n_periods + t - 1] };
                        target[r * n_periods + t] = pct_change(prev, raw[r * n_periods + t]);
                    }
                }
                Ok(TransformState::PctChange)
            }
            TargetTransform::AlertLabels { threshold } => {
                let labels = self.derive_alert_labels(*threshold);
                let target = self.target_mut();
                for (v, label) in target.iter_mut().zip(labels) {
                    *v = label.map(AlertLabel::code);
                }
                Ok(TransformState::AlertLabels {
                    threshold: *threshold,
                })
            }
        }
    }

    /// Label per row from the percentage change of the target against the
    /// previous period; missing when either value is missing or the
    /// baseline is zero.
    pub fn derive_alert_labels(&self, threshold: f64) -> Vec<Option<AlertLabel>> {
        let n_periods = self.range().len();
        self.target()
            .iter()
            .enumerate()
            .map(|(row, cur)| {
                let t = row % n_periods;
                let prev = if t == 0 {
                    None
                } else {
                    self.target()[row - 1]
                };
                pct_change(prev, *cur).map(|pct| classify(pct, threshold))
            })
            .collect()
    }
}

//! Rolling-origin evaluation: time-ordered cross-validation splits, error
//! metrics, common-support scoring, per-region ranking, hyperparameter
//! selection, forward feature selection, and holdout reporting.

mod harness;
mod metrics;
mod report;
mod score;
mod splits;

pub use harness::{
    cross_validate, fit_panel_estimator, forward_select, holdout_evaluate, predict_panel_rows,
    CvOutcome, CvSpecResult, PanelModel,
};
pub use metrics::{evaluate_metric, MetricKind};
pub use report::{OmittedModel, Partition, ScoreEntry, ScoreReport, SeriesBlock};
pub use score::{average_ranks, common_support, rank_by_region, score_models, PartitionScores};
pub use splits::{expanding_splits, sliding_splits, Fold, SplitPlan};

use thiserror::Error;

use crate::models::ModelError;
use crate::panel::PanelError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("too few periods: have {have}, need at least {need}")]
    TooFewPeriods { have: usize, need: usize },
    #[error("predictions and actuals have different lengths ({preds} vs {actuals})")]
    LengthMismatch { preds: usize, actuals: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("zero actual value at index {index} is undefined under MAPE")]
    ZeroActualInMape { index: usize },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("no observation is predicted by every model")]
    NoCommonSupport,
    #[error("every spec in the grid failed: {reasons:?}")]
    AllSpecsFailed { reasons: Vec<String> },
    #[error("no test periods after the training end")]
    EmptyTestPartition,
    #[error("training end {0} lies outside the panel range")]
    TrainEndOutOfRange(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Panel(#[from] PanelError),
}

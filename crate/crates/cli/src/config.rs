//! The pipeline configuration document: one JSON file describing input
//! paths, the forecasting task, panel engineering options, the model grid,
//! and the evaluation protocol. Relative paths resolve against the config
//! file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fdf_core::evaluation::MetricKind;
use fdf_core::models::{BenchmarkSpec, Estimator, ModelSpec};
use fdf_core::panel::{NeighborMode, TargetKind, TargetTransform};
use fdf_core::period::Period;

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub paths: InputPaths,
    pub task: TaskConfig,
    #[serde(default)]
    pub panel: PanelConfig,
    pub models: ModelGridConfig,
    pub evaluation: EvaluationConfig,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputPaths {
    pub flows: PathBuf,
    pub regions: PathBuf,
    #[serde(default)]
    pub adjacency: Option<PathBuf>,
    #[serde(default)]
    pub distances: Option<PathBuf>,
    #[serde(default)]
    pub events: Option<PathBuf>,
    #[serde(default)]
    pub features: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskConfig {
    pub target: TargetKind,
    pub horizons: Vec<u32>,
    #[serde(default = "default_transform")]
    pub transform: TargetTransform,
    #[serde(default = "default_alert_threshold")]
    pub alert_threshold: f64,
}

fn default_transform() -> TargetTransform {
    TargetTransform::Identity
}

fn default_alert_threshold() -> f64 {
    0.30
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborConfig {
    None,
    Adjacent,
    All,
}

impl NeighborConfig {
    pub fn mode(&self) -> Option<NeighborMode> {
        match self {
            NeighborConfig::None => None,
            NeighborConfig::Adjacent => Some(NeighborMode::Adjacent),
            NeighborConfig::All => Some(NeighborMode::All),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelConfig {
    #[serde(default = "default_true")]
    pub zero_as_missing: bool,
    #[serde(default = "default_target_lags")]
    pub target_lags: Vec<u32>,
    #[serde(default = "default_feature_lags")]
    pub feature_lags: Vec<u32>,
    #[serde(default = "default_neighbor_mode")]
    pub neighbor_mode: NeighborConfig,
    #[serde(default = "default_true")]
    pub impute: bool,
}

fn default_true() -> bool {
    true
}

fn default_target_lags() -> Vec<u32> {
    vec![1, 2, 3, 6, 12]
}

fn default_feature_lags() -> Vec<u32> {
    vec![1, 2, 3]
}

fn default_neighbor_mode() -> NeighborConfig {
    NeighborConfig::Adjacent
}

impl Default for PanelConfig {
    fn default() -> Self {
        PanelConfig {
            zero_as_missing: true,
            target_lags: default_target_lags(),
            feature_lags: default_feature_lags(),
            neighbor_mode: default_neighbor_mode(),
            impute: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RidgeGrid {
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoGrid {
    pub lambdas: Vec<f64>,
    #[serde(default = "default_lasso_tol")]
    pub tol: f64,
    #[serde(default = "default_lasso_max_iter")]
    pub max_iter: u32,
}

fn default_lasso_tol() -> f64 {
    1e-8
}

fn default_lasso_max_iter() -> u32 {
    10_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeGrid {
    pub max_depths: Vec<u32>,
    #[serde(default = "default_min_leaf")]
    pub min_samples_leaf: usize,
}

fn default_min_leaf() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    #[serde(default)]
    pub m_features: Option<usize>,
    #[serde(default = "default_true")]
    pub bootstrap: bool,
    #[serde(default = "default_forest_depth")]
    pub max_depth: u32,
    #[serde(default = "default_min_leaf")]
    pub min_samples_leaf: usize,
}

fn default_forest_depth() -> u32 {
    u32::MAX
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbmConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelGridConfig {
    #[serde(default)]
    pub benchmarks: Vec<BenchmarkSpec>,
    #[serde(default)]
    pub ridge: Option<RidgeGrid>,
    #[serde(default)]
    pub lasso: Option<LassoGrid>,
    #[serde(default)]
    pub tree: Option<TreeGrid>,
    #[serde(default)]
    pub forest: Option<ForestConfig>,
    #[serde(default)]
    pub gbm: Option<GbmConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CvConfig {
    Expanding { k: usize, min_train: usize },
    Sliding { k: usize, train_len: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub cv: CvConfig,
    #[serde(default = "default_metric")]
    pub metric: MetricKind,
    pub train_end: Period,
}

fn default_metric() -> MetricKind {
    MetricKind::Rmse
}

/// One family of candidate estimators sharing a report row.
#[derive(Debug, Clone)]
pub struct FamilyGrid {
    pub name: String,
    pub grid: Vec<Estimator>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let config: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        let base = path
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((config, base))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "unsupported config schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.task.horizons.is_empty() || self.task.horizons.contains(&0) {
            return Err(CliError::Input(
                "task.horizons must be a non-empty list of integers >= 1".into(),
            ));
        }
        if self.task.alert_threshold.is_nan() || self.task.alert_threshold <= 0.0 {
            return Err(CliError::Input("task.alert_threshold must be > 0".into()));
        }
        if self.panel.target_lags.contains(&0) || self.panel.feature_lags.contains(&0) {
            return Err(CliError::Input("lags must be >= 1".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for spec in &self.models.benchmarks {
            spec.validate()
                .map_err(|e| CliError::Input(format!("benchmarks: {e}")))?;
            if !names.insert(spec.display_name()) {
                return Err(CliError::Input(format!(
                    "benchmarks: duplicate entry {:?}",
                    spec.display_name()
                )));
            }
        }
        let has_model = !self.models.benchmarks.is_empty()
            || self.models.ridge.is_some()
            || self.models.lasso.is_some()
            || self.models.tree.is_some()
            || self.models.forest.is_some()
            || self.models.gbm.is_some();
        if !has_model {
            return Err(CliError::Input("models: configure at least one model".into()));
        }
        match &self.evaluation.cv {
            CvConfig::Expanding { k, min_train } if *k == 0 || *min_train == 0 => {
                return Err(CliError::Input("evaluation.cv: k and min_train must be >= 1".into()))
            }
            CvConfig::Sliding { k, train_len } if *k == 0 || *train_len == 0 => {
                return Err(CliError::Input("evaluation.cv: k and train_len must be >= 1".into()))
            }
            _ => {}
        }
        Ok(())
    }

    /// Resolves a configured path against the config file's directory.
    pub fn resolve(&self, base: &Path, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            base.join(path)
        }
    }

    /// Canonical serialized form (used for the manifest digest).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Every benchmark as an individually named model entry.
    pub fn benchmark_models(&self) -> Vec<(String, Estimator)> {
        self.models
            .benchmarks
            .iter()
            .map(|spec| {
                (
                    spec.display_name(),
                    Estimator::new(ModelSpec::Benchmark { spec: spec.clone() }, self.seed),
                )
            })
            .collect()
    }

    /// Supervised families with their hyperparameter grids, in report
    /// order.
    pub fn family_grids(&self) -> Vec<FamilyGrid> {
        let mut families = Vec::new();
        if let Some(ridge) = &self.models.ridge {
            families.push(FamilyGrid {
                name: "Ridge Regression".into(),
                grid: ridge
                    .lambdas
                    .iter()
                    .map(|&lambda| Estimator::new(ModelSpec::Ridge { lambda }, self.seed))
                    .collect(),
            });
        }
        if let Some(lasso) = &self.models.lasso {
            families.push(FamilyGrid {
                name: "Lasso Regression".into(),
                grid: lasso
                    .lambdas
                    .iter()
                    .map(|&lambda| {
                        Estimator::new(
                            ModelSpec::Lasso {
                                lambda,
                                tol: lasso.tol,
                                max_iter: lasso.max_iter,
                            },
                            self.seed,
                        )
                    })
                    .collect(),
            });
        }
        if let Some(tree) = &self.models.tree {
            families.push(FamilyGrid {
                name: "Decision Tree".into(),
                grid: tree
                    .max_depths
                    .iter()
                    .map(|&max_depth| {
                        Estimator::new(
                            ModelSpec::Tree {
                                max_depth,
                                min_samples_leaf: tree.min_samples_leaf,
                            },
                            self.seed,
                        )
                    })
                    .collect(),
            });
        }
        if let Some(forest) = &self.models.forest {
            families.push(FamilyGrid {
                name: "Random Forest".into(),
                grid: vec![Estimator::new(
                    ModelSpec::Forest {
                        n_trees: forest.n_trees,
                        m_features: forest.m_features,
                        bootstrap: forest.bootstrap,
                        max_depth: forest.max_depth,
                        min_samples_leaf: forest.min_samples_leaf,
                    },
                    self.seed,
                )],
            });
        }
        if let Some(gbm) = &self.models.gbm {
            families.push(FamilyGrid {
                name: "Gradient Boosting".into(),
                grid: vec![Estimator::new(
                    ModelSpec::Gbm {
                        n_rounds: gbm.n_rounds,
                        learning_rate: gbm.learning_rate,
                        max_depth: gbm.max_depth,
                    },
                    self.seed,
                )],
            });
        }
        families
    }
}

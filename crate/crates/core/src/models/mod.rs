//! The estimator zoo: naive series benchmarks, regularized linear models,
//! logistic and gravity models, CART trees, random forests, and
//! gradient-boosted trees.
//!
//! Every fit is deterministic given `(data, spec, seed)`. Randomness is
//! drawn from a ChaCha generator seeded with the estimator seed, using one
//! counter-indexed substream per tree so parallel and sequential fits
//! agree. Fitted models are immutable and serialize to a versioned JSON
//! document that reproduces predictions bit-exactly on round-trip.

pub mod benchmarks;
mod forest;
mod gbm;
mod gravity;
mod linalg;
mod linear;
mod logistic;
mod tree;

pub use benchmarks::{predict_benchmark, BenchmarkSpec};
pub use forest::{fit_forest, ForestModel, ForestParams};
pub use gbm::{fit_gbm, training_sse_by_round, GbmModel, GbmParams};
pub use gravity::{fit_gravity, GravityFit, GravityModel, GravityRow};
pub use linear::{fit_lasso, fit_ridge, LassoFit, LinearModel, Penalty};
pub use logistic::{
    fit_logistic, gradient as logistic_gradient, log_likelihood as logistic_log_likelihood,
    LogisticModel,
};
pub use tree::{fit_tree, TreeModel, TreeNode};

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("design matrix is singular; regularize or drop collinear columns")]
    SingularSystem,
    #[error("coordinate descent stopped after {iterations} iterations with delta {delta:e}")]
    NotConverged { iterations: u32, delta: f64 },
    #[error("classes are separable; the unpenalized likelihood is unbounded")]
    Separable,
    #[error("need at least {needed} usable rows, found {found}")]
    InsufficientRows { needed: usize, found: usize },
    #[error("collinear design")]
    CollinearDesign,
    #[error("lag {n} is shorter than the forecast horizon {h}")]
    LagShorterThanHorizon { n: u32, h: u32 },
    #[error("x has {x_rows} rows but y has {y_len}")]
    DimensionMismatch { x_rows: usize, y_len: usize },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("target must be binary 0/1")]
    NonBinaryTarget,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Family-level parameters of one model in the zoo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Benchmark {
        spec: BenchmarkSpec,
    },
    Ridge {
        lambda: f64,
    },
    Lasso {
        lambda: f64,
        #[serde(default = "default_lasso_tol")]
        tol: f64,
        #[serde(default = "default_lasso_max_iter")]
        max_iter: u32,
    },
    Logistic {
        l2: f64,
    },
    Gravity,
    Tree {
        max_depth: u32,
        min_samples_leaf: usize,
    },
    Forest {
        n_trees: usize,
        /// Feature-subset size per split; `None` means `floor(sqrt(p))`.
        m_features: Option<usize>,
        bootstrap: bool,
        #[serde(default = "default_unlimited_depth")]
        max_depth: u32,
        #[serde(default = "default_min_leaf")]
        min_samples_leaf: usize,
    },
    Gbm {
        n_rounds: usize,
        learning_rate: f64,
        max_depth: u32,
    },
}

fn default_lasso_tol() -> f64 {
    1e-8
}

fn default_lasso_max_iter() -> u32 {
    10_000
}

fn default_unlimited_depth() -> u32 {
    u32::MAX
}

fn default_min_leaf() -> usize {
    1
}

impl ModelSpec {
    /// Human-readable family name used in reports. Grid variants within a
    /// family share the name; hyperparameters are resolved by selection.
    pub fn display_name(&self) -> String {
        match self {
            ModelSpec::Benchmark { spec } => spec.display_name(),
            ModelSpec::Ridge { .. } => "Ridge Regression".into(),
            ModelSpec::Lasso { .. } => "Lasso Regression".into(),
            ModelSpec::Logistic { .. } => "Logistic Regression".into(),
            ModelSpec::Gravity => "Gravity Model".into(),
            ModelSpec::Tree { .. } => "Decision Tree".into(),
            ModelSpec::Forest { .. } => "Random Forest".into(),
            ModelSpec::Gbm { .. } => "Gradient Boosting".into(),
        }
    }

    /// Stable key for deterministic lexicographic tie-breaking.
    pub fn sort_key(&self) -> String {
        serde_json::to_string(self).expect("specs serialize")
    }

    /// Benchmarks predict from the target history alone; everything else
    /// fits on a feature matrix.
    pub fn is_benchmark(&self) -> bool {
        matches!(self, ModelSpec::Benchmark { .. })
    }
}

/// A model spec plus the seed that fixes all of its randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    pub spec: ModelSpec,
    pub seed: u64,
}

impl Estimator {
    pub fn new(spec: ModelSpec, seed: u64) -> Self {
        Estimator { spec, seed }
    }

    /// Fits the supervised families on `(x, y)`. Benchmarks carry no fitted
    /// state; the gravity family interprets the columns of `x` as
    /// `[origin_feature, destination_feature, distance]`.
    pub fn fit(&self, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<FittedModel, ModelError> {
        match &self.spec {
            ModelSpec::Benchmark { spec } => Ok(FittedModel::Benchmark { spec: spec.clone() }),
            ModelSpec::Ridge { lambda } => fit_ridge(x, y, *lambda).map(FittedModel::Linear),
            ModelSpec::Lasso {
                lambda,
                tol,
                max_iter,
            } => fit_lasso(x, y, *lambda, *tol, *max_iter).map(|fit| FittedModel::Linear(fit.model)),
            ModelSpec::Logistic { l2 } => fit_logistic(x, y, *l2).map(FittedModel::Logistic),
            ModelSpec::Gravity => {
                if x.ncols() != 3 {
                    return Err(ModelError::InvalidParameter(
                        "gravity expects columns [origin_feature, destination_feature, distance]"
                            .into(),
                    ));
                }
                let rows: Vec<GravityRow> = (0..x.nrows())
                    .map(|i| GravityRow {
                        flow: y[i],
                        origin_feature: x[(i, 0)],
                        destination_feature: x[(i, 1)],
                        distance: x[(i, 2)],
                    })
                    .collect();
                fit_gravity(&rows).map(|fit| FittedModel::Gravity(fit.model))
            }
            ModelSpec::Tree {
                max_depth,
                min_samples_leaf,
            } => fit_tree(x, y, *max_depth, *min_samples_leaf).map(FittedModel::Tree),
            ModelSpec::Forest {
                n_trees,
                m_features,
                bootstrap,
                max_depth,
                min_samples_leaf,
            } => fit_forest(
                x,
                y,
                &ForestParams {
                    n_trees: *n_trees,
                    m_features: *m_features,
                    bootstrap: *bootstrap,
                    max_depth: *max_depth,
                    min_samples_leaf: *min_samples_leaf,
                },
                self.seed,
            )
            .map(FittedModel::Forest),
            ModelSpec::Gbm {
                n_rounds,
                learning_rate,
                max_depth,
            } => fit_gbm(
                x,
                y,
                &GbmParams {
                    n_rounds: *n_rounds,
                    learning_rate: *learning_rate,
                    max_depth: *max_depth,
                    min_samples_leaf: 1,
                },
                self.seed,
            )
            .map(FittedModel::Gbm),
        }
    }
}

/// A fitted model of any family. Benchmarks have no feature-row predictor;
/// they are evaluated against the target history instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedModel {
    Benchmark { spec: BenchmarkSpec },
    Linear(LinearModel),
    Logistic(LogisticModel),
    Gravity(GravityModel),
    Tree(TreeModel),
    Forest(ForestModel),
    Gbm(GbmModel),
}

impl FittedModel {
    /// Prediction for one feature row; `None` for benchmark models, which
    /// predict from history rather than features.
    pub fn predict_row(&self, row: ArrayView1<f64>) -> Option<f64> {
        match self {
            FittedModel::Benchmark { .. } => None,
            FittedModel::Linear(m) => Some(m.predict_row(row)),
            FittedModel::Logistic(m) => Some(m.predict_proba(row)),
            FittedModel::Gravity(m) => Some(m.predict(row[0], row[1], row[2])),
            FittedModel::Tree(m) => Some(m.predict_row(row)),
            FittedModel::Forest(m) => Some(m.predict_row(row)),
            FittedModel::Gbm(m) => Some(m.predict_row(row)),
        }
    }

    /// Count of nonzero fitted parameters; the sparser-model tie-break in
    /// selection.
    pub fn nonzero_parameters(&self) -> u64 {
        match self {
            FittedModel::Benchmark { .. } => 0,
            FittedModel::Linear(m) => {
                m.coefficients.iter().filter(|c| **c != 0.0).count() as u64
            }
            FittedModel::Logistic(m) => {
                m.coefficients.iter().filter(|c| **c != 0.0).count() as u64
            }
            FittedModel::Gravity(_) => 4,
            FittedModel::Tree(m) => m.n_leaves() as u64,
            FittedModel::Forest(m) => m.trees.iter().map(|t| t.n_leaves() as u64).sum(),
            FittedModel::Gbm(m) => 1 + m.trees.iter().map(|t| t.n_leaves() as u64).sum::<u64>(),
        }
    }
}

/// Versioned serialization envelope for fitted models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub seed: u64,
    pub spec: ModelSpec,
    pub model: FittedModel,
}

impl ModelDocument {
    pub const SCHEMA_VERSION: u32 = 1;

    pub fn new(estimator: &Estimator, model: FittedModel) -> Self {
        ModelDocument {
            schema_version: Self::SCHEMA_VERSION,
            seed: estimator.seed,
            spec: estimator.spec.clone(),
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents serialize")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(seed: u64, n: usize, p: usize) -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-5.0..5.0));
        let y = Array1::from_shape_fn(n, |i| {
            x[(i, 0)] * 2.0 - x[(i, p - 1)] + rng.gen_range(-0.5..0.5)
        });
        (x, y)
    }

    #[test]
    fn every_family_round_trips_through_json() {
        let (x, y) = random_dataset(7, 30, 3);
        let yb = y.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
        let gx = x.mapv(|v| v.abs() + 0.5);
        let specs: Vec<(ModelSpec, Array1<f64>)> = vec![
            (
                ModelSpec::Benchmark {
                    spec: BenchmarkSpec::Lag { n: 1 },
                },
                y.clone(),
            ),
            (ModelSpec::Ridge { lambda: 0.5 }, y.clone()),
            (
                ModelSpec::Lasso {
                    lambda: 0.01,
                    tol: 1e-8,
                    max_iter: 10_000,
                },
                y.clone(),
            ),
            (ModelSpec::Logistic { l2: 0.1 }, yb),
            (ModelSpec::Gravity, gx.column(0).mapv(|v| v + 1.0)),
            (
                ModelSpec::Tree {
                    max_depth: 3,
                    min_samples_leaf: 2,
                },
                y.clone(),
            ),
            (
                ModelSpec::Forest {
                    n_trees: 5,
                    m_features: Some(2),
                    bootstrap: true,
                    max_depth: 4,
                    min_samples_leaf: 1,
                },
                y.clone(),
            ),
            (
                ModelSpec::Gbm {
                    n_rounds: 5,
                    learning_rate: 0.3,
                    max_depth: 2,
                },
                y.clone(),
            ),
        ];
        for (spec, target) in specs {
            let estimator = Estimator::new(spec.clone(), 42);
            let design = if matches!(spec, ModelSpec::Gravity) {
                gx.clone()
            } else {
                x.clone()
            };
            let fitted = estimator.fit(design.view(), target.view()).unwrap();
            let doc = ModelDocument::new(&estimator, fitted.clone());
            let back = ModelDocument::from_json(&doc.to_json()).unwrap();
            assert_eq!(back.schema_version, 1);
            assert_eq!(back.spec, spec);
            for i in 0..design.nrows() {
                let a = fitted.predict_row(design.row(i));
                let b = back.model.predict_row(design.row(i));
                match (a, b) {
                    (Some(a), Some(b)) => assert_eq!(a.to_bits(), b.to_bits(), "{spec:?}"),
                    (None, None) => {}
                    other => panic!("mismatch {other:?}"),
                }
            }
        }
    }

    #[test]
    fn display_names_are_family_level() {
        assert_eq!(
            ModelSpec::Ridge { lambda: 1.0 }.display_name(),
            ModelSpec::Ridge { lambda: 9.0 }.display_name()
        );
        assert_eq!(
            ModelSpec::Benchmark {
                spec: BenchmarkSpec::Ewm { n: 8 }
            }
            .display_name(),
            "Exp. Weighted Mean (8)"
        );
    }

    #[test]
    fn nonzero_parameters_counts_sparsity() {
        let x = array![[1.0], [-1.0]];
        let y = array![1.0, -1.0];
        let est = |lambda| Estimator::new(
            ModelSpec::Lasso {
                lambda,
                tol: 1e-10,
                max_iter: 10_000,
            },
            0,
        );
        let dense = est(0.1).fit(x.view(), y.view()).unwrap();
        let sparse = est(2.0).fit(x.view(), y.view()).unwrap();
        assert_eq!(dense.nonzero_parameters(), 1);
        assert_eq!(sparse.nonzero_parameters(), 0);
    }
}

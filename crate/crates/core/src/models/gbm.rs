//! Gradient boosting with squared loss: a constant initial prediction plus
//! a sequence of shallow CART trees, each fit to the residuals of the
//! ensemble so far and added with a learning-rate damping.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, TreeModel};
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: u32,
    pub min_samples_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    /// F0, the mean of the training target.
    pub initial: f64,
    pub learning_rate: f64,
    pub trees: Vec<TreeModel>,
}

impl GbmModel {
    pub fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        self.initial
            + self.learning_rate
                * self
                    .trees
                    .iter()
                    .map(|t| t.predict_row(row))
                    .sum::<f64>()
    }
}

/// Fits the boosted ensemble. The fit is fully deterministic; `seed` is
/// accepted for contract uniformity with the other ensemble models.
pub fn fit_gbm(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    params: &GbmParams,
    _seed: u64,
) -> Result<GbmModel, ModelError> {
    if x.nrows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            x_rows: x.nrows(),
            y_len: y.len(),
        });
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if params.learning_rate.is_nan() || params.learning_rate <= 0.0 || params.learning_rate > 1.0 {
        return Err(ModelError::InvalidParameter(
            "learning_rate must be in (0, 1]".into(),
        ));
    }
    if params.n_rounds == 0 {
        return Err(ModelError::InvalidParameter("n_rounds must be >= 1".into()));
    }

    let initial = y.mean().unwrap();
    let mut current = Array1::from_elem(y.len(), initial);
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        let residuals = &y.to_owned() - &current;
        let tree = fit_tree(
            x,
            residuals.view(),
            params.max_depth,
            params.min_samples_leaf,
        )?;
        for i in 0..y.len() {
            current[i] += params.learning_rate * tree.predict_row(x.row(i));
        }
        trees.push(tree);
    }
    Ok(GbmModel {
        initial,
        learning_rate: params.learning_rate,
        trees,
    })
}

/// Training sum of squared errors after each round, starting from the
/// constant model. Used to audit the monotone-improvement property.
pub fn training_sse_by_round(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    model: &GbmModel,
) -> Vec<f64> {
    let mut current = Array1::from_elem(y.len(), model.initial);
    let sse = |preds: &Array1<f64>| -> f64 {
        preds
            .iter()
            .zip(y.iter())
            .map(|(p, t)| (p - t) * (p - t))
            .sum()
    };
    let mut out = vec![sse(&current)];
    for tree in &model.trees {
        for i in 0..y.len() {
            current[i] += model.learning_rate * tree.predict_row(x.row(i));
        }
        out.push(sse(&current));
    }
    out
}

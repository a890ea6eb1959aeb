//! Random forest regression: bagged CART trees with per-split feature
//! subsampling, averaged for prediction.
//!
//! Each tree draws from its own counter-indexed ChaCha substream of the
//! estimator seed, so fitting trees in parallel or sequentially produces
//! identical forests.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_with_sampler, TreeModel};
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features considered per split; `None` means `floor(sqrt(p))`,
    /// clamped to at least one.
    pub m_features: Option<usize>,
    pub bootstrap: bool,
    pub max_depth: u32,
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            m_features: None,
            bootstrap: true,
            max_depth: u32::MAX,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub bootstrap: bool,
    pub m_features: usize,
}

impl ForestModel {
    /// Arithmetic mean of the member trees' predictions.
    pub fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        self.trees
            .iter()
            .map(|t| t.predict_row(row))
            .sum::<f64>()
            / self.trees.len() as f64
    }
}

pub fn fit_forest(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, ModelError> {
    if x.nrows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            x_rows: x.nrows(),
            y_len: y.len(),
        });
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if params.n_trees == 0 {
        return Err(ModelError::InvalidParameter("n_trees must be >= 1".into()));
    }
    let p = x.ncols();
    let m = match params.m_features {
        Some(m) if m == 0 || m > p => {
            return Err(ModelError::InvalidParameter(format!(
                "m_features must be in 1..={p}"
            )))
        }
        Some(m) => m,
        None => ((p as f64).sqrt().floor() as usize).max(1).min(p.max(1)),
    };
    if params.min_samples_leaf == 0 {
        return Err(ModelError::InvalidParameter(
            "min_samples_leaf must be >= 1".into(),
        ));
    }

    let n = x.nrows();
    let trees: Vec<TreeModel> = (0..params.n_trees)
        .map(|tree_index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(tree_index as u64);
            let (xs, ys): (Array2<f64>, Array1<f64>) = if params.bootstrap {
                let picks: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                (
                    Array2::from_shape_fn((n, p), |(i, j)| x[(picks[i], j)]),
                    Array1::from_shape_fn(n, |i| y[picks[i]]),
                )
            } else {
                (x.to_owned(), y.to_owned())
            };
            let mut sampler = |n_features: usize| -> Vec<usize> {
                if m >= n_features {
                    (0..n_features).collect()
                } else {
                    let mut picks = rand::seq::index::sample(&mut rng, n_features, m).into_vec();
                    picks.sort_unstable();
                    picks
                }
            };
            fit_tree_with_sampler(
                xs.view(),
                ys.view(),
                params.max_depth,
                params.min_samples_leaf,
                &mut sampler,
            )
        })
        .collect();

    Ok(ForestModel {
        trees,
        bootstrap: params.bootstrap,
        m_features: m,
    })
}

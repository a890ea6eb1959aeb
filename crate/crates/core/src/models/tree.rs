//! CART regression trees: greedy best-split search minimizing the summed
//! squared error of child means.
//!
//! Candidate thresholds are midpoints between consecutive distinct sorted
//! values. Ties are broken deterministically by lowest feature index, then
//! lowest threshold; leaves predict the training mean of their rows.

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A fitted regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
}

impl TreeModel {
    pub fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Supplies the candidate feature indices considered at one split,
/// in ascending order.
pub(crate) type FeatureSampler<'a> = dyn FnMut(usize) -> Vec<usize> + 'a;

struct Builder<'x, 'y> {
    x: ArrayView2<'x, f64>,
    y: ArrayView1<'y, f64>,
    min_leaf: usize,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    children_sse: f64,
}

impl<'x, 'y> Builder<'x, 'y> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let mean = rows.iter().map(|&i| self.y[i]).sum::<f64>() / rows.len() as f64;
        self.nodes.push(TreeNode::Leaf { value: mean });
        self.nodes.len() - 1
    }

    fn build(&mut self, rows: Vec<usize>, depth_left: u32, sampler: &mut FeatureSampler) -> usize {
        debug_assert!(!rows.is_empty());
        if depth_left == 0 || rows.len() < 2 * self.min_leaf {
            return self.leaf(&rows);
        }
        let sum: f64 = rows.iter().map(|&i| self.y[i]).sum();
        let sumsq: f64 = rows.iter().map(|&i| self.y[i] * self.y[i]).sum();
        let parent_sse = (sumsq - sum * sum / rows.len() as f64).max(0.0);
        // Effectively-constant targets never split; this also absorbs
        // floating-point noise in the SSE identity.
        if parent_sse <= 1e-12 * (1.0 + sumsq.abs()) {
            return self.leaf(&rows);
        }

        let candidates = sampler(self.x.ncols());
        let best = self.search(&rows, sum, sumsq, parent_sse, &candidates);
        let Some(best) = best else {
            return self.leaf(&rows);
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.x[(i, best.feature)] <= best.threshold);
        let index = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: f64::NAN }); // patched below
        let left = self.build(left_rows, depth_left - 1, sampler);
        let right = self.build(right_rows, depth_left - 1, sampler);
        self.nodes[index] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        index
    }

    fn search(
        &self,
        rows: &[usize],
        total_sum: f64,
        total_sumsq: f64,
        parent_sse: f64,
        candidates: &[usize],
    ) -> Option<BestSplit> {
        let n = rows.len();
        let mut best: Option<BestSplit> = None;
        let mut order: Vec<usize> = rows.to_vec();
        for &feature in candidates {
            order.sort_unstable_by(|&a, &b| {
                self.x[(a, feature)]
                    .partial_cmp(&self.x[(b, feature)])
                    .expect("finite feature values")
            });
            let mut left_sum = 0.0;
            let mut left_sumsq = 0.0;
            for k in 0..n - 1 {
                let yi = self.y[order[k]];
                left_sum += yi;
                left_sumsq += yi * yi;
                let v = self.x[(order[k], feature)];
                let next = self.x[(order[k + 1], feature)];
                if v == next {
                    continue;
                }
                let left_n = (k + 1) as f64;
                let right_n = (n - k - 1) as f64;
                if (k + 1) < self.min_leaf || (n - k - 1) < self.min_leaf {
                    continue;
                }
                let sse_left = (left_sumsq - left_sum * left_sum / left_n).max(0.0);
                let right_sum = total_sum - left_sum;
                let sse_right =
                    ((total_sumsq - left_sumsq) - right_sum * right_sum / right_n).max(0.0);
                let total = sse_left + sse_right;
                // Strict `<` keeps the first (lowest feature, lowest
                // threshold) candidate on ties.
                let improves = match &best {
                    None => total < parent_sse,
                    Some(b) => total < b.children_sse,
                };
                if improves {
                    best = Some(BestSplit {
                        feature,
                        threshold: (v + next) / 2.0,
                        children_sse: total,
                    });
                }
            }
        }
        best
    }
}

pub(crate) fn fit_tree_with_sampler<'x, 'y>(
    x: ArrayView2<'x, f64>,
    y: ArrayView1<'y, f64>,
    max_depth: u32,
    min_samples_leaf: usize,
    sampler: &mut FeatureSampler,
) -> TreeModel {
    let mut builder = Builder {
        x,
        y,
        min_leaf: min_samples_leaf,
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..x.nrows()).collect();
    let root = builder.build(rows, max_depth, sampler);
    debug_assert_eq!(root, 0);
    TreeModel {
        nodes: builder.nodes,
    }
}

/// Fits a CART regression tree considering all features at every split.
/// `max_depth = 0` yields a single leaf predicting the target mean.
pub fn fit_tree<'x, 'y>(
    x: ArrayView2<'x, f64>,
    y: ArrayView1<'y, f64>,
    max_depth: u32,
    min_samples_leaf: usize,
) -> Result<TreeModel, ModelError> {
    if x.nrows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            x_rows: x.nrows(),
            y_len: y.len(),
        });
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if min_samples_leaf == 0 {
        return Err(ModelError::InvalidParameter(
            "min_samples_leaf must be >= 1".into(),
        ));
    }
    Ok(fit_tree_with_sampler(
        x,
        y,
        max_depth,
        min_samples_leaf,
        &mut |p| (0..p).collect(),
    ))
}

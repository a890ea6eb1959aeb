//! Independent reference computations for tests.
//!
//! Everything in this crate is a deliberately naive implementation — triple
//! loops, proximal-gradient descent, exhaustive search — kept separate from
//! the production code paths it is used to check. It is a dev-dependency
//! only and is never shipped.

pub mod panels;

pub mod flows {
    //! Brute-force flow-matrix aggregation over raw entry vectors.

    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Random square matrix entries (row-major), with roughly one cell in
    /// eight missing to exercise missing-value propagation.
    pub fn random_matrix(size: usize, seed: u64, max: u64) -> Vec<Option<u64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..size * size)
            .map(|_| {
                if rng.gen_range(0..8) == 0 {
                    None
                } else {
                    Some(rng.gen_range(0..=max))
                }
            })
            .collect()
    }

    /// Dense random matrix with no missing cells.
    pub fn random_complete_matrix(size: usize, seed: u64, max: u64) -> Vec<Option<u64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..size * size).map(|_| Some(rng.gen_range(0..=max))).collect()
    }

    pub fn internal(entries: &[Option<u64>], size: usize, i: usize) -> Option<u64> {
        entries[i * size + i]
    }

    pub fn outflow(entries: &[Option<u64>], size: usize, i: usize) -> Option<u64> {
        let mut acc = 0u64;
        for j in 0..size {
            if j != i {
                acc += entries[i * size + j]?;
            }
        }
        Some(acc)
    }

    pub fn inflow(entries: &[Option<u64>], size: usize, i: usize) -> Option<u64> {
        let mut acc = 0u64;
        for j in 0..size {
            if j != i {
                acc += entries[j * size + i]?;
            }
        }
        Some(acc)
    }

    pub fn arrivals(entries: &[Option<u64>], size: usize, i: usize) -> Option<u64> {
        Some(inflow(entries, size, i)? + internal(entries, size, i)?)
    }
}

pub mod lasso {
    //! Proximal-gradient (ISTA) reference solver for the lasso objective
    //! `(1/2n)·||y - b0·1 - X·b||² + lambda·||b||₁` with an unpenalized
    //! intercept handled by centering.

    use ndarray::{Array1, ArrayView1, ArrayView2, Axis};

    pub fn objective(
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        intercept: f64,
        beta: ArrayView1<f64>,
        lambda: f64,
    ) -> f64 {
        let n = y.len() as f64;
        let resid = &y.to_owned() - &(x.dot(&beta) + intercept);
        let rss: f64 = resid.iter().map(|e| e * e).sum();
        rss / (2.0 * n) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    fn soft(z: f64, gamma: f64) -> f64 {
        z.signum() * (z.abs() - gamma).max(0.0)
    }

    /// Runs ISTA to (near-)convergence and returns `(intercept, beta)`.
    pub fn solve(
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        lambda: f64,
        iterations: usize,
    ) -> (f64, Array1<f64>) {
        let n = x.nrows();
        let p = x.ncols();
        let nf = n as f64;
        let x_mean = x.mean_axis(Axis(0)).unwrap();
        let y_mean = y.mean().unwrap();
        let xc = &x.to_owned() - &x_mean.view().insert_axis(Axis(0));
        let yc = &y.to_owned() - y_mean;

        // Lipschitz bound for the smooth part: row-sum bound on X'X / n.
        let gram = xc.t().dot(&xc) / nf;
        let lip = (0..p)
            .map(|j| (0..p).map(|k| gram[(j, k)].abs()).sum::<f64>())
            .fold(1e-12_f64, f64::max);
        let step = 1.0 / lip;

        let mut beta = Array1::<f64>::zeros(p);
        for _ in 0..iterations {
            let grad = gram.dot(&beta) - xc.t().dot(&yc) / nf;
            let mut next = beta.clone();
            for j in 0..p {
                next[j] = soft(beta[j] - step * grad[j], step * lambda);
            }
            let delta = (&next - &beta).iter().map(|d| d.abs()).fold(0.0, f64::max);
            beta = next;
            if delta < 1e-12 {
                break;
            }
        }
        let intercept = y_mean - x_mean.dot(&beta);
        (intercept, beta)
    }
}

pub mod numeric {
    //! Generic numeric helpers shared by tests.

    /// Central finite-difference gradient of `f` at `point`.
    pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, point: &[f64], h: f64) -> Vec<f64> {
        (0..point.len())
            .map(|i| {
                let mut hi = point.to_vec();
                let mut lo = point.to_vec();
                hi[i] += h;
                lo[i] -= h;
                (f(&hi) - f(&lo)) / (2.0 * h)
            })
            .collect()
    }

    /// Pearson correlation coefficient of two equal-length samples.
    pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), b.len());
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (x, y) in a.iter().zip(b) {
            cov += (x - ma) * (y - mb);
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
        }
        cov / (va.sqrt() * vb.sqrt())
    }
}

pub mod tree {
    //! Exhaustive split search over every feature and every midpoint
    //! threshold; returns the split minimizing summed child squared error.

    /// `(feature, threshold, total_sse)` of the best root split, or `None`
    /// when no split separates the data.
    pub fn best_root_split(
        x: &[Vec<f64>], // row-major
        y: &[f64],
        min_samples_leaf: usize,
    ) -> Option<(usize, f64, f64)> {
        let n = y.len();
        let p = x.first().map(|r| r.len()).unwrap_or(0);
        let sse = |idx: &[usize]| -> f64 {
            if idx.is_empty() {
                return 0.0;
            }
            let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
            idx.iter().map(|&i| (y[i] - mean).powi(2)).sum()
        };
        let parent_sse = sse(&(0..n).collect::<Vec<_>>());
        let mut best: Option<(usize, f64, f64)> = None;
        for feature in 0..p {
            let mut values: Vec<f64> = x.iter().map(|r| r[feature]).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values.dedup();
            for w in values.windows(2) {
                let threshold = (w[0] + w[1]) / 2.0;
                let left: Vec<usize> = (0..n).filter(|&i| x[i][feature] <= threshold).collect();
                let right: Vec<usize> = (0..n).filter(|&i| x[i][feature] > threshold).collect();
                if left.len() < min_samples_leaf || right.len() < min_samples_leaf {
                    continue;
                }
                let total = sse(&left) + sse(&right);
                let better = match best {
                    None => total < parent_sse,
                    Some((_, _, best_sse)) => total < best_sse,
                };
                if better {
                    best = Some((feature, threshold, total));
                }
            }
        }
        best
    }
}

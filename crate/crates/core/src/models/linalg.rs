//! Small dense symmetric solves used by the linear-model fits.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

/// Solves `A x = b` for symmetric positive-definite `A` via Cholesky.
/// Returns `None` when the decomposition breaks down (singular or
/// indefinite input).
pub fn cholesky_solve(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), n);
    debug_assert_eq!(b.len(), n);
    if n == 0 {
        return Some(Array1::zeros(0));
    }

    // Lower-triangular factor, row-major in a flat buffer.
    let mut l = vec![0.0f64; n * n];
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag.is_nan() || diag <= 1e-12 * (1.0 + a[(j, j)].abs()) || !diag.is_finite() {
            return None;
        }
        let root = diag.sqrt();
        l[j * n + j] = root;
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / root;
        }
    }

    // Forward solve L z = b, then back solve L^T x = z.
    let mut z = Array1::zeros(n);
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * z[k];
        }
        z[i] = v / l[i * n + i];
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut v = z[i];
        for k in (i + 1)..n {
            v -= l[k * n + i] * x[k];
        }
        x[i] = v / l[i * n + i];
    }
    Some(x)
}

/// Column means of `x` and the mean of `y`, plus centered copies of both.
pub fn centered(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
) -> (Array2<f64>, Array1<f64>, Array1<f64>, f64) {
    let x_mean = if x.nrows() == 0 {
        Array1::zeros(x.ncols())
    } else {
        x.mean_axis(Axis(0)).expect("non-empty rows")
    };
    let y_mean = if y.is_empty() { 0.0 } else { y.mean().unwrap() };
    let xc = &x.to_owned() - &x_mean.view().insert_axis(Axis(0));
    let yc = &y.to_owned() - y_mean;
    (xc, yc, x_mean, y_mean)
}

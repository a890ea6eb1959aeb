//! Gravity model of pairwise flows, estimated by ordinary least squares on
//! the log-transformed form:
//!
//! `log(a_ij) = alpha + b1*log(X_i) + b2*log(X_j) - b3*log(d_ij)`
//!
//! which exponentiates back to `a_ij = e^alpha * X_i^b1 * X_j^b2 / d_ij^b3`.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::linalg::cholesky_solve;
use super::ModelError;

/// One origin-destination observation. Only strictly positive rows are
/// usable in the log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityRow {
    pub flow: f64,
    pub origin_feature: f64,
    pub destination_feature: f64,
    pub distance: f64,
}

impl GravityRow {
    fn usable(&self) -> bool {
        self.flow > 0.0
            && self.origin_feature > 0.0
            && self.destination_feature > 0.0
            && self.distance > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GravityModel {
    pub alpha: f64,
    pub origin_exponent: f64,
    pub destination_exponent: f64,
    pub distance_exponent: f64,
}

impl GravityModel {
    /// Predicted flow for strictly positive inputs.
    pub fn predict(&self, origin_feature: f64, destination_feature: f64, distance: f64) -> f64 {
        (self.alpha
            + self.origin_exponent * origin_feature.ln()
            + self.destination_exponent * destination_feature.ln()
            - self.distance_exponent * distance.ln())
        .exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GravityFit {
    pub model: GravityModel,
    /// Rows dropped because flow, features, or distance were not strictly
    /// positive.
    pub dropped_rows: usize,
}

/// Fits the four gravity parameters; needs at least four usable rows.
pub fn fit_gravity(rows: &[GravityRow]) -> Result<GravityFit, ModelError> {
    let usable: Vec<&GravityRow> = rows.iter().filter(|r| r.usable()).collect();
    let dropped_rows = rows.len() - usable.len();
    if usable.len() < 4 {
        return Err(ModelError::InsufficientRows {
            needed: 4,
            found: usable.len(),
        });
    }
    let n = usable.len();
    let mut design = Array2::<f64>::zeros((n, 4));
    let mut target = Array1::<f64>::zeros(n);
    for (i, row) in usable.iter().enumerate() {
        design[(i, 0)] = 1.0;
        design[(i, 1)] = row.origin_feature.ln();
        design[(i, 2)] = row.destination_feature.ln();
        design[(i, 3)] = row.distance.ln();
        target[i] = row.flow.ln();
    }
    let gram = design.t().dot(&design);
    let rhs = design.t().dot(&target);
    let coefs = cholesky_solve(&gram, &rhs).ok_or(ModelError::CollinearDesign)?;
    Ok(GravityFit {
        model: GravityModel {
            alpha: coefs[0],
            origin_exponent: coefs[1],
            destination_exponent: coefs[2],
            distance_exponent: -coefs[3],
        },
        dropped_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plug_in_prediction() {
        // alpha = ln 2, b1 = b2 = 1, b3 = 2: 2 * 4 * 9 / 36 = 2.
        let model = GravityModel {
            alpha: 2.0f64.ln(),
            origin_exponent: 1.0,
            destination_exponent: 1.0,
            distance_exponent: 2.0,
        };
        assert!((model.predict(4.0, 9.0, 6.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_parameters_from_noiseless_data() {
        let truth = GravityModel {
            alpha: 0.7,
            origin_exponent: 1.3,
            destination_exponent: 0.8,
            distance_exponent: 1.9,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<GravityRow> = (0..20)
            .map(|_| {
                let xi = rng.gen_range(1.0..50.0);
                let xj = rng.gen_range(1.0..50.0);
                let d = rng.gen_range(5.0..500.0);
                GravityRow {
                    flow: truth.predict(xi, xj, d),
                    origin_feature: xi,
                    destination_feature: xj,
                    distance: d,
                }
            })
            .collect();
        let fit = fit_gravity(&rows).unwrap();
        assert_eq!(fit.dropped_rows, 0);
        assert!((fit.model.alpha - truth.alpha).abs() < 1e-8);
        assert!((fit.model.origin_exponent - truth.origin_exponent).abs() < 1e-8);
        assert!((fit.model.destination_exponent - truth.destination_exponent).abs() < 1e-8);
        assert!((fit.model.distance_exponent - truth.distance_exponent).abs() < 1e-8);
    }

    #[test]
    fn doubling_distance_halves_flow_at_unit_exponent() {
        let model = GravityModel {
            alpha: 1.1,
            origin_exponent: 0.6,
            destination_exponent: 1.4,
            distance_exponent: 1.0,
        };
        for (xi, xj, d) in [(3.0, 8.0, 10.0), (1.5, 2.5, 77.0)] {
            let full = model.predict(xi, xj, d);
            let halved = model.predict(xi, xj, 2.0 * d);
            assert!((halved - full / 2.0).abs() < 1e-12 * full);
        }
    }

    #[test]
    fn non_positive_rows_are_dropped_and_counted() {
        let good = GravityRow {
            flow: 2.0,
            origin_feature: 3.0,
            destination_feature: 4.0,
            distance: 5.0,
        };
        let mut rows = vec![good; 6];
        // Perturb so the design has full rank.
        for (i, row) in rows.iter_mut().enumerate() {
            row.origin_feature += i as f64;
            row.destination_feature += (i * i) as f64;
            row.distance += (i * 3) as f64;
            row.flow += i as f64 * 0.5;
        }
        rows.push(GravityRow {
            flow: 0.0,
            ..good
        });
        rows.push(GravityRow {
            distance: -1.0,
            ..good
        });
        let fit = fit_gravity(&rows).unwrap();
        assert_eq!(fit.dropped_rows, 2);
    }

    #[test]
    fn too_few_usable_rows_is_an_error() {
        let row = GravityRow {
            flow: 1.0,
            origin_feature: 1.0,
            destination_feature: 1.0,
            distance: 1.0,
        };
        assert!(matches!(
            fit_gravity(&[row; 3]),
            Err(ModelError::InsufficientRows { needed: 4, found: 3 })
        ));
    }

    #[test]
    fn collinear_design_is_rejected() {
        // distance proportional to origin feature makes the log design
        // linearly dependent with the intercept... use identical columns.
        let rows: Vec<GravityRow> = (1..8)
            .map(|i| GravityRow {
                flow: i as f64,
                origin_feature: i as f64,
                destination_feature: i as f64, // same as origin: collinear
                distance: 7.0,                 // constant: collinear with intercept
            })
            .collect();
        assert!(matches!(
            fit_gravity(&rows),
            Err(ModelError::CollinearDesign)
        ));
    }
}

//! Forecasting toolkit for monthly, per-region displacement arrivals.
//!
//! The crate is organised around the stages of the forecasting pipeline:
//!
//! - [`flow`] — ingest flow records and region metadata, build per-period
//!   origin-destination matrices, and compute the standard aggregations
//!   (internal displacement, inflows, outflows, pairwise flows, arrivals).
//! - [`panel`] — assemble the (region, period) design panel, engineer lag /
//!   neighbor / calendar / missingness features, impute, and transform the
//!   target under a strict issuance-period contract: a prediction for target
//!   period `t` at horizon `h` may only use data from periods `<= t - h`.
//! - [`models`] — a deterministic estimator zoo: naive series benchmarks,
//!   ridge and lasso regression, logistic and gravity models, CART trees,
//!   random forests, and gradient-boosted trees.
//! - [`evaluation`] — rolling-origin cross-validation, error metrics,
//!   common-support scoring, per-region ranking, and holdout evaluation.

pub mod evaluation;
pub mod flow;
pub mod models;
pub mod panel;
pub mod period;

pub use period::{Period, PeriodRange};

//! Synthetic dataset generation: desk-scale stand-ins for sensitive field
//! data, with known generating structure recorded in a ground-truth file.
//!
//! Three scenarios:
//! - `seasonal`: arrivals follow a region-specific 12-month sinusoid plus
//!   noise, so long seasonal lags are genuinely informative;
//! - `feature_driven`: arrivals are a linear function of conflict-incident
//!   counts four months earlier plus noise, so lagged event features carry
//!   most of the signal;
//! - `bursty`: Poisson arrivals with rare ten-fold spikes and frequent
//!   zeros, exercising the zero-as-missing path.

use std::fmt::Write as _;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use fdf_core::period::Period;

use crate::CliError;

pub const DRIVER_WEIGHT: f64 = 40.0;
pub const DRIVER_LAG: usize = 4;
const INTERNAL_SHARE: f64 = 0.6;
const SEASONAL_AMPLITUDE: f64 = 0.5;
const SEASONAL_NOISE: f64 = 0.08;
const BURSTY_GAP_RATE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Seasonal,
    FeatureDriven,
    Bursty,
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seasonal" => Ok(Scenario::Seasonal),
            "feature_driven" => Ok(Scenario::FeatureDriven),
            "bursty" => Ok(Scenario::Bursty),
            other => Err(format!(
                "unknown scenario {other:?} (expected seasonal, feature_driven, or bursty)"
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionTruth {
    pub name: String,
    pub base: f64,
    pub phase: f64,
    pub event_rate: f64,
}

/// The exact generator parameters behind a synthetic dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub seed: u64,
    pub n_regions: usize,
    pub n_periods: usize,
    pub start: Period,
    pub regions: Vec<RegionTruth>,
    pub internal_share: f64,
    pub seasonal_amplitude: f64,
    pub seasonal_noise: f64,
    pub driver_weight: f64,
    pub driver_lag: usize,
    /// Probability that a bursty-scenario month records zero arrivals
    /// (a reporting gap); zero for the other scenarios.
    pub zero_inflation: f64,
}

struct Generated {
    truth: GroundTruth,
    /// Arrivals per (region, period), region-major.
    arrivals: Vec<Vec<u64>>,
    /// Conflict incidents per (region, period).
    incidents: Vec<Vec<u64>>,
}

fn generate(
    scenario: Scenario,
    seed: u64,
    n_regions: usize,
    n_periods: usize,
) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Period = "2011-01".parse().unwrap();
    let mut regions = Vec::with_capacity(n_regions);
    for i in 0..n_regions {
        regions.push(RegionTruth {
            name: format!("R{:02}", i + 1),
            base: match scenario {
                Scenario::Seasonal => rng.gen_range(500.0..1500.0),
                Scenario::FeatureDriven => rng.gen_range(300.0..800.0),
                Scenario::Bursty => rng.gen_range(1.0..30.0),
            },
            phase: i as f64 * 0.7,
            event_rate: match scenario {
                Scenario::FeatureDriven => rng.gen_range(4.0..12.0),
                _ => 1.5,
            },
        });
    }

    let mut incidents = Vec::with_capacity(n_regions);
    for region in &regions {
        let poisson = Poisson::new(region.event_rate).expect("positive rate");
        let series: Vec<u64> = (0..n_periods)
            .map(|_| poisson.sample(&mut rng) as u64)
            .collect();
        incidents.push(series);
    }

    let mut arrivals = Vec::with_capacity(n_regions);
    for (r, region) in regions.iter().enumerate() {
        let series: Vec<u64> = (0..n_periods)
            .map(|t| {
                let value = match scenario {
                    Scenario::Seasonal => {
                        let month = start.add_months(t as i64).month() as f64;
                        let angle = 2.0 * std::f64::consts::PI * month / 12.0 + region.phase;
                        let noise = rng.gen_range(-SEASONAL_NOISE..SEASONAL_NOISE);
                        region.base * (1.0 + SEASONAL_AMPLITUDE * angle.sin()) + region.base * noise
                    }
                    Scenario::FeatureDriven => {
                        let driver = if t >= DRIVER_LAG {
                            incidents[r][t - DRIVER_LAG] as f64
                        } else {
                            region.event_rate
                        };
                        let noise = rng.gen_range(-25.0..25.0);
                        region.base + DRIVER_WEIGHT * driver + noise
                    }
                    Scenario::Bursty => {
                        let poisson = Poisson::new(region.base).expect("positive rate");
                        let mut value = poisson.sample(&mut rng);
                        if rng.gen_bool(0.05) {
                            value *= 10.0;
                        }
                        if rng.gen_bool(BURSTY_GAP_RATE) {
                            value = 0.0; // reporting gap
                        }
                        value
                    }
                };
                value.round().max(if scenario == Scenario::Bursty { 0.0 } else { 1.0 })
                    as u64
            })
            .collect();
        arrivals.push(series);
    }

    Generated {
        truth: GroundTruth {
            schema_version: 1,
            scenario,
            seed,
            n_regions,
            n_periods,
            start,
            regions,
            internal_share: INTERNAL_SHARE,
            seasonal_amplitude: SEASONAL_AMPLITUDE,
            seasonal_noise: SEASONAL_NOISE,
            driver_weight: DRIVER_WEIGHT,
            driver_lag: DRIVER_LAG,
            zero_inflation: if scenario == Scenario::Bursty {
                BURSTY_GAP_RATE
            } else {
                0.0
            },
        },
        arrivals,
        incidents,
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)
        .map_err(|e| CliError::Input(format!("cannot write {name}: {e}")))
}

/// Generates a complete synthetic dataset plus a ready-to-run pipeline
/// config, returning the ground truth that was materialized.
pub fn generate_dataset(
    scenario: Scenario,
    seed: u64,
    n_regions: usize,
    n_periods: usize,
    out_dir: &Path,
) -> Result<GroundTruth, CliError> {
    if n_regions < 2 {
        return Err(CliError::Input("n_regions must be at least 2".into()));
    }
    if n_periods < 24 {
        return Err(CliError::Input("n_periods must be at least 24".into()));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;

    let generated = generate(scenario, seed, n_regions, n_periods);
    let truth = &generated.truth;
    let names: Vec<&str> = truth.regions.iter().map(|r| r.name.as_str()).collect();
    let start = truth.start;

    let mut regions_csv = String::from("region\n");
    for name in &names {
        let _ = writeln!(regions_csv, "{name}");
    }
    write_file(out_dir, "regions.csv", &regions_csv)?;

    // Ring adjacency: each region borders its two index neighbors.
    let mut adjacency_csv = String::from("region_a,region_b\n");
    for i in 0..n_regions {
        let j = (i + 1) % n_regions;
        let _ = writeln!(adjacency_csv, "{},{}", names[i], names[j]);
    }
    write_file(out_dir, "adjacency.csv", &adjacency_csv)?;

    // Driving distances grow with ring distance and are mildly asymmetric.
    let mut distances_csv = String::from("origin,destination,km\n");
    for i in 0..n_regions {
        for j in 0..n_regions {
            if i == j {
                continue;
            }
            let ring = {
                let d = (i as i64 - j as i64).unsigned_abs() as usize;
                d.min(n_regions - d)
            };
            let km = ring as f64 * 120.0 * if i < j { 1.0 } else { 1.03 };
            let _ = writeln!(distances_csv, "{},{},{km}", names[i], names[j]);
        }
    }
    write_file(out_dir, "distances.csv", &distances_csv)?;

    // Arrivals split into internal displacement and inflows from the two
    // ring neighbors.
    let mut flows_csv = String::from("period,origin,destination,count\n");
    for t in 0..n_periods {
        let period = start.add_months(t as i64);
        for r in 0..n_regions {
            let total = generated.arrivals[r][t] as f64;
            let internal = (total * INTERNAL_SHARE).round() as u64;
            let per_neighbor = (total * (1.0 - INTERNAL_SHARE) / 2.0).round() as u64;
            if internal > 0 {
                let _ = writeln!(flows_csv, "{period},{0},{0},{internal}", names[r]);
            }
            for neighbor in [(r + 1) % n_regions, (r + n_regions - 1) % n_regions] {
                if per_neighbor > 0 {
                    let _ = writeln!(
                        flows_csv,
                        "{period},{},{},{per_neighbor}",
                        names[neighbor], names[r]
                    );
                }
            }
        }
    }
    write_file(out_dir, "flows.csv", &flows_csv)?;

    // Conflict events: one row per incident, dated within the month.
    let mut events_csv = String::from("date,region,kind,fatalities\n");
    let mut event_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0e7e);
    for t in 0..n_periods {
        let period = start.add_months(t as i64);
        for (name, incidents) in names.iter().zip(&generated.incidents) {
            for k in 0..incidents[t] {
                let day = 1 + (k * 7) % 28;
                let kind = if k % 3 == 0 { "battle" } else { "riot" };
                let fatalities = event_rng.gen_range(0..4);
                let _ = writeln!(events_csv, "{period}-{day:02},{name},{kind},{fatalities}");
            }
        }
    }
    write_file(out_dir, "events.csv", &events_csv)?;

    // Contextual indicators: a price-index random walk and seasonal
    // rainfall; neither drives arrivals in any scenario.
    let mut features_csv = String::from("period,region,price_index,rainfall\n");
    let mut feature_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfea7);
    let mut price: Vec<f64> = (0..n_regions).map(|_| feature_rng.gen_range(80.0..120.0)).collect();
    for t in 0..n_periods {
        let period = start.add_months(t as i64);
        for r in 0..n_regions {
            price[r] += feature_rng.gen_range(-2.0..2.0);
            let rain = 50.0
                + 40.0 * (2.0 * std::f64::consts::PI * (t % 12) as f64 / 12.0).cos()
                + feature_rng.gen_range(-5.0..5.0);
            let _ = writeln!(
                features_csv,
                "{period},{},{:.3},{:.3}",
                names[r], price[r], rain
            );
        }
    }
    write_file(out_dir, "features.csv", &features_csv)?;

    write_file(
        out_dir,
        "ground_truth.json",
        &serde_json::to_string_pretty(truth).expect("ground truth serializes"),
    )?;

    write_file(out_dir, "config.json", &default_config_json(truth))?;
    Ok(generated.truth)
}

/// A runnable config for the generated dataset: an 80/20 holdout split,
/// expanding-window selection, and the standard benchmark set.
fn default_config_json(truth: &GroundTruth) -> String {
    let train_months = (truth.n_periods * 4) / 5;
    let train_end = truth.start.add_months(train_months as i64 - 1);
    // The earliest fold must contain rows whose longest target lag (12) is
    // observable at the longest horizon (3), with a little slack.
    let min_train = (train_months / 2).max(12 + 3 + 3);
    let k = (train_months - min_train).clamp(1, 5);
    let config = serde_json::json!({
        "schema_version": 1,
        "seed": truth.seed,
        "paths": {
            "flows": "flows.csv",
            "regions": "regions.csv",
            "adjacency": "adjacency.csv",
            "distances": "distances.csv",
            "events": "events.csv",
            "features": ["features.csv"]
        },
        "task": {
            "target": {"kind": "arrivals"},
            "horizons": [1, 3],
            "transform": {"kind": "identity"},
            "alert_threshold": 0.30
        },
        "panel": {
            "zero_as_missing": true,
            "target_lags": [1, 2, 3, 6, 12],
            "feature_lags": [1, 2, 3, 4, 6],
            "neighbor_mode": "adjacent",
            "impute": true
        },
        "models": {
            "benchmarks": [
                {"kind": "lag", "n": 1},
                {"kind": "lag", "n": 12},
                {"kind": "expanding_mean"},
                {"kind": "ewm", "n": 8},
                {"kind": "ewm", "n": 23},
                {"kind": "rolling_mean", "n": 12}
            ],
            "ridge": {"lambdas": [0.1, 1.0, 10.0, 100.0]},
            "lasso": {"lambdas": [0.1, 1.0], "tol": 1e-7, "max_iter": 20000},
            "tree": {"max_depths": [3, 5], "min_samples_leaf": 5},
            "forest": {
                "n_trees": 20,
                "m_features": null,
                "bootstrap": true,
                "max_depth": 8,
                "min_samples_leaf": 2
            },
            "gbm": {"n_rounds": 30, "learning_rate": 0.1, "max_depth": 3}
        },
        "evaluation": {
            "cv": {"kind": "expanding", "k": k, "min_train": min_train},
            "metric": {"kind": "rmse"},
            "train_end": train_end.to_string()
        }
    });
    serde_json::to_string_pretty(&config).expect("config serializes")
}

//! Naive series benchmarks: lagged values, expanding means, rolling means,
//! and exponentially weighted means.
//!
//! A benchmark prediction for target period `t` at horizon `h` sees the
//! masked target history up to the issuance period `s = t - h` and nothing
//! later. `None` in the history is a masked observation; a benchmark that
//! cannot form a value returns `Ok(None)` (no prediction).

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchmarkSpec {
    /// Predict the value observed `n` periods before the target period;
    /// `n = 1` is last observation carried forward. Requires `n >= h`.
    Lag { n: u32 },
    /// Mean of everything observed to date.
    ExpandingMean,
    /// Span-`n` exponentially weighted mean with `alpha = 2/(n+1)` and
    /// weights normalized over the observed history.
    Ewm { n: u32 },
    /// Mean of the last `n` periods' observed values.
    RollingMean { n: u32 },
}

impl BenchmarkSpec {
    pub fn display_name(&self) -> String {
        match self {
            BenchmarkSpec::Lag { n } => format!("Lag ({n})"),
            BenchmarkSpec::ExpandingMean => "Expanding Mean".into(),
            BenchmarkSpec::Ewm { n } => format!("Exp. Weighted Mean ({n})"),
            BenchmarkSpec::RollingMean { n } => format!("Rolling Mean ({n})"),
        }
    }

    /// Structurally infeasible combinations (a lag shorter than the
    /// horizon would have to read the future).
    pub fn feasible_at_horizon(&self, horizon: u32) -> bool {
        match self {
            BenchmarkSpec::Lag { n } => *n >= horizon,
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = match self {
            BenchmarkSpec::Lag { n } => *n,
            BenchmarkSpec::Ewm { n } => *n,
            BenchmarkSpec::RollingMean { n } => *n,
            BenchmarkSpec::ExpandingMean => return Ok(()),
        };
        if n == 0 {
            return Err(ModelError::InvalidParameter(
                "benchmark window/lag must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Predicts for target period `t = s + horizon` from `history`, whose last
/// entry is the issuance period `s`.
pub fn predict_benchmark(
    history: &[Option<f64>],
    spec: &BenchmarkSpec,
    horizon: u32,
) -> Result<Option<f64>, ModelError> {
    spec.validate()?;
    if horizon == 0 {
        return Err(ModelError::InvalidParameter("horizon must be >= 1".into()));
    }
    match spec {
        BenchmarkSpec::Lag { n } => {
            if *n < horizon {
                return Err(ModelError::LagShorterThanHorizon {
                    n: *n,
                    h: horizon,
                });
            }
            let back = (*n - horizon) as usize; // steps before s
            if back >= history.len() {
                return Ok(None);
            }
            Ok(history[history.len() - 1 - back])
        }
        BenchmarkSpec::ExpandingMean => Ok(mean_of(history.iter().copied())),
        BenchmarkSpec::RollingMean { n } => {
            let window = history.len().min(*n as usize);
            Ok(mean_of(history[history.len() - window..].iter().copied()))
        }
        BenchmarkSpec::Ewm { n } => {
            let alpha = 2.0 / (*n as f64 + 1.0);
            let decay = 1.0 - alpha;
            let mut numerator = 0.0;
            let mut denominator = 0.0;
            let mut weight = 1.0; // decay^k for k periods before s
            for value in history.iter().rev() {
                if let Some(v) = value {
                    numerator += weight * v;
                    denominator += weight;
                }
                weight *= decay;
            }
            if denominator == 0.0 {
                Ok(None)
            } else {
                Ok(Some(numerator / denominator))
            }
        }
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values.flatten() {
        sum += v;
        count += 1;
    }
    if count == 0 {
        None
    } else {
        Some(sum / count as f64)
    }
}

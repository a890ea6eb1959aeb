//! The serialized evaluation report: flat score entries, per-region rank
//! context, and the prediction series needed to re-render tables and plots
//! without re-training.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::period::PeriodRange;

use super::MetricKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Train,
    Test,
}

impl Partition {
    pub fn name(&self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Test => "test",
        }
    }
}

/// One scored cell: a model on one partition, overall (`region = None`) or
/// restricted to one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub model: String,
    pub horizon: u32,
    pub region: Option<String>,
    pub partition: Partition,
    pub score: f64,
    pub support: usize,
    /// Rank among the models scored in the same (horizon, region,
    /// partition) group; ties share the average rank.
    pub rank: f64,
}

/// A model excluded from a horizon for structural reasons (e.g. a lag
/// benchmark shorter than the horizon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedModel {
    pub model: String,
    pub horizon: u32,
    pub reason: String,
}

/// Raw-scale actual and per-model predicted series for one region at one
/// horizon, aligned to the report's period range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBlock {
    pub horizon: u32,
    pub region: String,
    pub actual: Vec<Option<f64>>,
    pub predictions: BTreeMap<String, Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub schema_version: u32,
    pub metric: MetricKind,
    pub seed: u64,
    pub horizons: Vec<u32>,
    /// Display order: ascending test score at the smallest horizon.
    pub models: Vec<String>,
    pub periods: PeriodRange,
    pub train_range: PeriodRange,
    pub test_range: PeriodRange,
    pub entries: Vec<ScoreEntry>,
    pub omitted: Vec<OmittedModel>,
    pub mape_excluded: usize,
    pub series: Vec<SeriesBlock>,
    pub warnings: Vec<String>,
}

impl ScoreReport {
    pub const SCHEMA_VERSION: u32 = 1;

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// Flat CSV view: `model,horizon,region,metric,partition,score,support_n,rank`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,horizon,region,metric,partition,score,support_n,rank\n");
        for e in &self.entries {
            let region = e.region.as_deref().unwrap_or("");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                csv_field(&e.model),
                e.horizon,
                csv_field(region),
                self.metric.name(),
                e.partition.name(),
                e.score,
                e.support,
                e.rank
            ));
        }
        out
    }

    /// Overall (region-less) score of one cell, if present.
    pub fn overall_score(&self, model: &str, horizon: u32, partition: Partition) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| {
                e.model == model
                    && e.horizon == horizon
                    && e.region.is_none()
                    && e.partition == partition
            })
            .map(|e| e.score)
    }

    /// Merges per-horizon reports into one document. Entries are re-sorted
    /// and the model display order is recomputed from the smallest
    /// horizon's test scores.
    pub fn merge(mut pieces: Vec<ScoreReport>) -> Option<ScoreReport> {
        pieces.sort_by_key(|p| p.horizons.clone());
        let first = pieces.first()?.clone();
        let mut merged = ScoreReport {
            horizons: Vec::new(),
            models: Vec::new(),
            entries: Vec::new(),
            omitted: Vec::new(),
            series: Vec::new(),
            warnings: Vec::new(),
            mape_excluded: 0,
            ..first
        };
        for piece in pieces {
            merged.horizons.extend(piece.horizons);
            merged.entries.extend(piece.entries);
            merged.omitted.extend(piece.omitted);
            merged.series.extend(piece.series);
            merged.warnings.extend(piece.warnings);
            merged.mape_excluded += piece.mape_excluded;
        }
        merged.horizons.sort_unstable();
        merged.horizons.dedup();
        merged.sort_entries();
        merged.models = merged.display_order();
        Some(merged)
    }

    pub(crate) fn sort_entries(&mut self) {
        self.entries.sort_by(|a, b| {
            a.horizon
                .cmp(&b.horizon)
                .then_with(|| a.region.cmp(&b.region))
                .then_with(|| a.partition.cmp(&b.partition))
                .then_with(|| a.model.cmp(&b.model))
        });
        self.omitted
            .sort_by(|a, b| a.horizon.cmp(&b.horizon).then_with(|| a.model.cmp(&b.model)));
        self.series.sort_by(|a, b| {
            a.horizon
                .cmp(&b.horizon)
                .then_with(|| a.region.cmp(&b.region))
        });
    }

    /// Models ordered by ascending test score at the smallest horizon;
    /// models without such a score follow alphabetically.
    pub(crate) fn display_order(&self) -> Vec<String> {
        let Some(&first_horizon) = self.horizons.first() else {
            return Vec::new();
        };
        let mut scored: Vec<(f64, String)> = self
            .entries
            .iter()
            .filter(|e| {
                e.horizon == first_horizon && e.region.is_none() && e.partition == Partition::Test
            })
            .map(|e| (e.score, e.model.clone()))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let mut order: Vec<String> = scored.into_iter().map(|(_, m)| m).collect();
        let mut rest: Vec<String> = self
            .entries
            .iter()
            .map(|e| e.model.clone())
            .chain(self.omitted.iter().map(|o| o.model.clone()))
            .filter(|m| !order.contains(m))
            .collect();
        rest.sort();
        rest.dedup();
        order.extend(rest);
        order
    }
}

fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

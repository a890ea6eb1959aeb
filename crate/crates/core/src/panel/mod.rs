//! The (region, period) design panel and its feature engineering.
//!
//! Every row is one region at one target period `t`. A forecast for `t` at
//! horizon `h` is issued at period `s = t - h`, and the central contract of
//! this module is that nothing observable in a row — lagged targets, lagged
//! features, neighbor copies, missingness flags — may depend on data from
//! periods after `s`. Calendar features (region and month dummies, months
//! since the epoch) are deterministic functions of the row key and are
//! always allowed.

mod features;
mod transform;

pub use features::NeighborMode;
pub use transform::{AlertLabel, TransformState};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FeatureTable, FlowError, FlowMatrix, RegionId, RegionRegistry};
use crate::period::{Period, PeriodRange};

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("column {0:?} already exists")]
    ColumnCollision(String),
    #[error("registry has no regions")]
    EmptyRegistry,
    #[error("adjacency requested but the registry has no adjacency pairs")]
    MissingAdjacency,
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("unknown region {0:?}")]
    UnknownRegion(String),
    #[error("flow matrices must cover contiguous ascending periods")]
    NonContiguousPeriods,
    #[error("transform requires a training range")]
    MissingTrainRange,
    #[error("{0} has no inverse")]
    NonInvertibleTransform(&'static str),
    #[error("column {0:?} cannot be lagged (only raw feature columns can)")]
    InvalidLagBase(String),
    #[error("forecast horizon must be at least 1")]
    InvalidHorizon,
    #[error("lags must be at least 1")]
    InvalidLag,
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Which aggregation of the flow matrix is being forecast.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    Arrivals,
    Inflow,
    Outflow,
    Internal,
    Pairwise { destination: RegionId },
}

/// How the target is re-expressed before models see it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetTransform {
    Identity,
    Log1p,
    PerRegionZscore,
    PctChange,
    AlertLabels { threshold: f64 },
}

/// The forecasting problem: what to predict, how far ahead, on what scale.
/// For a prediction at target period `t`, only data from periods
/// `<= t - horizon` may be used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastTask {
    pub horizon: u32,
    pub target: TargetKind,
    pub transform: TargetTransform,
}

impl ForecastTask {
    pub fn new(
        horizon: u32,
        target: TargetKind,
        transform: TargetTransform,
    ) -> Result<Self, PanelError> {
        if horizon == 0 {
            return Err(PanelError::InvalidHorizon);
        }
        Ok(ForecastTask {
            horizon,
            target,
            transform,
        })
    }
}

/// Where a column's values come from. Calendar columns are functions of the
/// row key alone; feature columns carry ingested data; target columns are
/// derived from the target series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnSource {
    Calendar,
    Feature,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub source: ColumnSource,
    /// Issuance-relative lag: `Some(k)` means the value is taken from
    /// period `s - (k - 1)`, so lag 1 is the issuance period itself.
    pub lag: Option<u32>,
    /// For neighbor columns, the region whose series was copied.
    pub origin_region: Option<RegionId>,
    pub is_missing_flag: bool,
}

impl ColumnMeta {
    fn raw_feature() -> Self {
        ColumnMeta {
            source: ColumnSource::Feature,
            lag: None,
            origin_region: None,
            is_missing_flag: false,
        }
    }

    fn calendar() -> Self {
        ColumnMeta {
            source: ColumnSource::Calendar,
            lag: None,
            origin_region: None,
            is_missing_flag: false,
        }
    }

    /// True when the value is knowable at the issuance period: calendar
    /// columns always, others only once they are lag-indexed.
    pub fn observable_at_issuance(&self) -> bool {
        self.source == ColumnSource::Calendar || self.lag.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub meta: ColumnMeta,
    values: Vec<Option<f64>>,
}

impl Column {
    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }
}

/// Options controlling panel assembly.
#[derive(Debug, Clone)]
pub struct AssembleOptions {
    /// Treat zero target counts as missing (gaps in field reporting are
    /// indistinguishable from true zeros in incident-level data).
    pub zero_as_missing: bool,
    /// Epoch for the continuous months-since-epoch time feature.
    pub epoch: Period,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            zero_as_missing: true,
            epoch: Period::new(2010, 1).expect("static period"),
        }
    }
}

/// The complete (region, period) grid: one target column plus named feature
/// columns, each tagged with source metadata. Rows are region-major, so
/// each region's periods are contiguous.
#[derive(Debug, Clone)]
pub struct PanelTable {
    regions: Vec<RegionId>,
    range: PeriodRange,
    task: ForecastTask,
    target: Vec<Option<f64>>,
    columns: Vec<Column>,
    index: BTreeMap<String, usize>,
}

impl PanelTable {
    /// Builds the full grid: target from the task's flow aggregation
    /// (masked per the options), ingested feature columns (missing where a
    /// table has no cell), and calendar features.
    pub fn assemble(
        matrices: &[FlowMatrix],
        feature_tables: &[FeatureTable],
        registry: &RegionRegistry,
        task: ForecastTask,
        options: &AssembleOptions,
    ) -> Result<Self, PanelError> {
        if registry.is_empty() {
            return Err(PanelError::EmptyRegistry);
        }
        if task.horizon == 0 {
            return Err(PanelError::InvalidHorizon);
        }
        let first = matrices.first().ok_or(PanelError::NonContiguousPeriods)?;
        let range = PeriodRange::new(first.period, matrices.last().unwrap().period)
            .ok_or(PanelError::NonContiguousPeriods)?;
        if range.len() != matrices.len()
            || !matrices
                .iter()
                .enumerate()
                .all(|(i, m)| m.period == range.start.add_months(i as i64))
        {
            return Err(PanelError::NonContiguousPeriods);
        }

        let n_regions = registry.len();
        let n_periods = range.len();
        let n_rows = n_regions * n_periods;

        let mut target = Vec::with_capacity(n_rows);
        for r in 0..n_regions {
            for m in matrices {
                let raw = match &task.target {
                    TargetKind::Arrivals => m.arrivals(r)?,
                    TargetKind::Inflow => m.total_inflow(r)?,
                    TargetKind::Outflow => m.total_outflow(r)?,
                    TargetKind::Internal => m.internal_displacement(r)?,
                    TargetKind::Pairwise { destination } => {
                        let j = registry
                            .index_of(destination)
                            .ok_or_else(|| PanelError::UnknownRegion(destination.0.clone()))?;
                        m.pairwise_flow(r, j)?
                    }
                };
                let masked = match raw {
                    Some(0) if options.zero_as_missing => None,
                    other => other,
                };
                target.push(masked.map(|v| v as f64));
            }
        }

        let mut panel = PanelTable {
            regions: registry.regions().to_vec(),
            range,
            task,
            target,
            columns: Vec::new(),
            index: BTreeMap::new(),
        };

        // Calendar features: region dummies, month-of-year dummies, and a
        // continuous months-since-epoch clock.
        let region_names = panel.regions.clone();
        for (ri, region) in region_names.iter().enumerate() {
            let values = panel
                .rows()
                .map(|(r, _)| Some(if r == ri { 1.0 } else { 0.0 }))
                .collect();
            panel.push_column(format!("region_{region}"), ColumnMeta::calendar(), values)?;
        }
        for month in 1..=12u8 {
            let values = panel
                .rows()
                .map(|(_, p)| Some(if p.month() == month { 1.0 } else { 0.0 }))
                .collect();
            panel.push_column(format!("month_{month}"), ColumnMeta::calendar(), values)?;
        }
        let epoch = options.epoch;
        let values = panel
            .rows()
            .map(|(_, p)| Some(p.months_since(&epoch) as f64))
            .collect();
        panel.push_column("months_since_epoch".into(), ColumnMeta::calendar(), values)?;

        for table in feature_tables {
            for (k, name) in table.columns.iter().enumerate() {
                let values = panel
                    .rows()
                    .map(|(r, p)| table.cells.get(&(r, p)).and_then(|row| row[k]))
                    .collect();
                panel.push_column(name.clone(), ColumnMeta::raw_feature(), values)?;
            }
        }
        Ok(panel)
    }

    /// Row keys in storage order: region-major, periods ascending.
    fn rows(&self) -> impl Iterator<Item = (usize, Period)> + '_ {
        let range = self.range;
        (0..self.regions.len()).flat_map(move |r| range.iter().map(move |p| (r, p)))
    }

    pub(crate) fn push_column(
        &mut self,
        name: String,
        meta: ColumnMeta,
        values: Vec<Option<f64>>,
    ) -> Result<(), PanelError> {
        debug_assert_eq!(values.len(), self.n_rows());
        if self.index.contains_key(&name) {
            return Err(PanelError::ColumnCollision(name));
        }
        self.index.insert(name.clone(), self.columns.len());
        self.columns.push(Column { name, meta, values });
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.regions.len() * self.range.len()
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn regions(&self) -> &[RegionId] {
        &self.regions
    }

    pub fn range(&self) -> PeriodRange {
        self.range
    }

    pub fn task(&self) -> &ForecastTask {
        &self.task
    }

    pub fn row_index(&self, region: usize, period: &Period) -> Option<usize> {
        let offset = self.range.offset_of(period)?;
        if region >= self.regions.len() {
            return None;
        }
        Some(region * self.range.len() + offset)
    }

    /// Region and target period of a flat row index.
    pub fn row_key(&self, row: usize) -> (usize, Period) {
        let n = self.range.len();
        (row / n, self.range.start.add_months((row % n) as i64))
    }

    pub fn target(&self) -> &[Option<f64>] {
        &self.target
    }

    pub(crate) fn target_mut(&mut self) -> &mut Vec<Option<f64>> {
        &mut self.target
    }

    /// The target series of one region across all panel periods.
    pub fn target_series(&self, region: usize) -> &[Option<f64>] {
        let n = self.range.len();
        &self.target[region * n..(region + 1) * n]
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.index.get(name).map(|&i| &self.columns[i])
    }

    pub(crate) fn column_mut(&mut self, name: &str) -> Option<&mut Column> {
        let i = *self.index.get(name)?;
        Some(&mut self.columns[i])
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Column names, sorted, that are safe inputs for a model predicting at
    /// the task's horizon.
    pub fn observable_columns(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .columns
            .iter()
            .filter(|c| c.meta.observable_at_issuance())
            .map(|c| c.name.clone())
            .collect();
        names.sort();
        names
    }

    /// Names of raw (unlagged, non-flag) ingested feature columns.
    pub fn raw_feature_columns(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .columns
            .iter()
            .filter(|c| {
                c.meta.source == ColumnSource::Feature
                    && c.meta.lag.is_none()
                    && !c.meta.is_missing_flag
                    && c.meta.origin_region.is_none()
            })
            .map(|c| c.name.clone())
            .collect();
        names.sort();
        names
    }

    /// Fraction of missing target cells for one region.
    pub fn target_missing_proportion(&self, region: usize) -> f64 {
        let series = self.target_series(region);
        series.iter().filter(|v| v.is_none()).count() as f64 / series.len() as f64
    }

    /// Renders the panel as CSV: `region,period,target,<columns sorted by
    /// name>`; missing cells are empty.
    pub fn to_csv_string(&self) -> String {
        fn field(out: &mut String, value: &str) {
            if value.contains(',') || value.contains('"') || value.contains('\n') {
                out.push('"');
                out.push_str(&value.replace('"', "\"\""));
                out.push('"');
            } else {
                out.push_str(value);
            }
        }
        let mut names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        names.sort();
        let mut out = String::from("region,period,target");
        for n in &names {
            out.push(',');
            field(&mut out, n);
        }
        out.push('\n');
        for (row, (r, p)) in self.rows().enumerate() {
            field(&mut out, self.regions[r].as_str());
            out.push(',');
            out.push_str(&p.to_string());
            out.push(',');
            if let Some(v) = self.target[row] {
                out.push_str(&v.to_string());
            }
            for n in &names {
                out.push(',');
                if let Some(v) = self.column(n).unwrap().values[row] {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

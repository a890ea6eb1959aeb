//! Flow records, per-period origin-destination matrices, and their
//! aggregations.
//!
//! The pairwise matrix for one period holds `a_ij`, the number of people who
//! moved from region `i` to region `j` during that period. Four aggregations
//! derive the usual target variables from it: internal displacement `a_ii`,
//! total outflows `Σ_{j≠i} a_ij`, total inflows `Σ_{j≠i} a_ji`, and the
//! pairwise flow `a_ij` itself. Arrivals — the operational target for
//! humanitarian response — combine inflows with internal displacement.
//!
//! Cells may be `MISSING` (represented as `None`); any aggregate that sums a
//! missing cell is itself missing, so downstream imputation stays explicit.

mod events;
mod ingest;

pub use events::{aggregate_events, CalendarDate, EventAggregates, EventRecord};
pub use ingest::{
    read_adjacency, read_distances, read_events, read_feature_table, read_flows, read_regions,
    FeatureTable,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::period::{Period, PeriodRange};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: unknown region {name:?}")]
    UnknownRegion { row: usize, name: String },
    #[error("row {row}: negative count {value}")]
    NegativeCount { row: usize, value: i64 },
    #[error("row {row}: unparseable date {value:?}")]
    UnparseableDate { row: usize, value: String },
    #[error("region index {index} out of range for {size} regions")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("empty period range")]
    EmptyPeriodRange,
    #[error("region {name:?} has no observed flows")]
    NoFlows { name: String },
    #[error("duplicate region {name:?} in registry")]
    DuplicateRegion { name: String },
    #[error("negative distance {km} for pair {origin:?} -> {destination:?}")]
    NegativeDistance {
        origin: String,
        destination: String,
        km: f64,
    },
    #[error("file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("file {path}: expected header {expected:?}, found {found:?}")]
    BadHeader {
        path: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
}

/// Identifier of an administrative region; compared by exact byte equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId(pub String);

impl RegionId {
    pub fn new(id: impl Into<String>) -> Self {
        RegionId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for RegionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered set of regions plus adjacency pairs and (possibly asymmetric)
/// pairwise driving distances. All index-based APIs use registry order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionRegistry {
    regions: Vec<RegionId>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
    adjacency: BTreeSet<(usize, usize)>,
    distances: BTreeMap<(usize, usize), f64>,
}

impl RegionRegistry {
    pub fn new(regions: Vec<RegionId>) -> Result<Self, FlowError> {
        let mut index = BTreeMap::new();
        for (i, r) in regions.iter().enumerate() {
            if index.insert(r.0.clone(), i).is_some() {
                return Err(FlowError::DuplicateRegion { name: r.0.clone() });
            }
        }
        Ok(RegionRegistry {
            regions,
            index,
            adjacency: BTreeSet::new(),
            distances: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn regions(&self) -> &[RegionId] {
        &self.regions
    }

    pub fn region(&self, index: usize) -> Result<&RegionId, FlowError> {
        self.regions.get(index).ok_or(FlowError::IndexOutOfRange {
            index,
            size: self.regions.len(),
        })
    }

    pub fn index_of(&self, id: &RegionId) -> Option<usize> {
        self.index.get(&id.0).copied()
    }

    fn require(&self, name: &str, row: usize) -> Result<usize, FlowError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| FlowError::UnknownRegion {
                row,
                name: name.to_string(),
            })
    }

    /// Registers an unordered adjacency pair. Both regions must be known.
    pub fn add_adjacency(&mut self, a: &RegionId, b: &RegionId) -> Result<(), FlowError> {
        let ia = self.require(&a.0, 0)?;
        let ib = self.require(&b.0, 0)?;
        self.adjacency.insert((ia.min(ib), ia.max(ib)));
        Ok(())
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency.contains(&(a.min(b), a.max(b)))
    }

    pub fn has_adjacency(&self) -> bool {
        !self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.regions.len())
            .filter(|&j| j != i && self.are_adjacent(i, j))
            .collect()
    }

    /// Sets a directed distance in kilometers. Distances may be asymmetric;
    /// set both directions explicitly when they differ.
    pub fn set_distance(
        &mut self,
        origin: &RegionId,
        destination: &RegionId,
        km: f64,
    ) -> Result<(), FlowError> {
        if km.is_nan() || km < 0.0 {
            return Err(FlowError::NegativeDistance {
                origin: origin.0.clone(),
                destination: destination.0.clone(),
                km,
            });
        }
        let io = self.require(&origin.0, 0)?;
        let id = self.require(&destination.0, 0)?;
        self.distances.insert((io, id), km);
        Ok(())
    }

    pub fn distance(&self, origin: usize, destination: usize) -> Option<f64> {
        self.distances.get(&(origin, destination)).copied()
    }
}

/// One ingested flow observation: `count` persons moved from `origin` to
/// `destination` during `period`. Duplicate keys are legal and sum later.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub period: Period,
    pub origin: RegionId,
    pub destination: RegionId,
    pub count: u64,
}

/// Square pairwise-flow matrix for a single period, in registry order.
/// `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowMatrix {
    pub period: Period,
    size: usize,
    entries: Vec<Option<u64>>,
}

impl FlowMatrix {
    pub fn zeros(period: Period, size: usize) -> Self {
        FlowMatrix {
            period,
            size,
            entries: vec![Some(0); size * size],
        }
    }

    pub fn from_entries(period: Period, size: usize, entries: Vec<Option<u64>>) -> Self {
        assert_eq!(entries.len(), size * size, "matrix must be square");
        FlowMatrix {
            period,
            size,
            entries,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> Result<Option<u64>, FlowError> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.entries[i * self.size + j])
    }

    pub fn set(&mut self, i: usize, j: usize, value: Option<u64>) -> Result<(), FlowError> {
        self.check(i)?;
        self.check(j)?;
        self.entries[i * self.size + j] = value;
        Ok(())
    }

    fn check(&self, i: usize) -> Result<(), FlowError> {
        if i >= self.size {
            Err(FlowError::IndexOutOfRange {
                index: i,
                size: self.size,
            })
        } else {
            Ok(())
        }
    }

    /// `a_ii`: movement that stays within region `i`.
    pub fn internal_displacement(&self, i: usize) -> Result<Option<u64>, FlowError> {
        self.get(i, i)
    }

    /// `Σ_{j≠i} a_ij`: total departures from region `i`.
    pub fn total_outflow(&self, i: usize) -> Result<Option<u64>, FlowError> {
        self.check(i)?;
        Ok(self.sum_cells((0..self.size).filter(|&j| j != i).map(|j| (i, j))))
    }

    /// `Σ_{j≠i} a_ji`: total arrivals to region `i` from other regions.
    pub fn total_inflow(&self, i: usize) -> Result<Option<u64>, FlowError> {
        self.check(i)?;
        Ok(self.sum_cells((0..self.size).filter(|&j| j != i).map(|j| (j, i))))
    }

    /// `a_ij`: direct flow from `i` to `j`.
    pub fn pairwise_flow(&self, i: usize, j: usize) -> Result<Option<u64>, FlowError> {
        self.get(i, j)
    }

    /// Inflows from other regions plus internal displacement.
    pub fn arrivals(&self, i: usize) -> Result<Option<u64>, FlowError> {
        let inflow = self.total_inflow(i)?;
        let internal = self.internal_displacement(i)?;
        Ok(match (inflow, internal) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        })
    }

    /// Sum of all cells; `None` if any cell is missing.
    pub fn total(&self) -> Option<u64> {
        self.sum_cells((0..self.size).flat_map(|i| (0..self.size).map(move |j| (i, j))))
    }

    fn sum_cells(&self, cells: impl Iterator<Item = (usize, usize)>) -> Option<u64> {
        let mut acc: u64 = 0;
        for (i, j) in cells {
            acc += self.entries[i * self.size + j]?;
        }
        Some(acc)
    }
}

/// Builds one matrix per period in `range`, summing all matching records.
/// Cells with no records are zero; missingness is applied downstream.
pub fn build_flow_matrices(
    records: &[FlowRecord],
    registry: &RegionRegistry,
    range: PeriodRange,
) -> Result<Vec<FlowMatrix>, FlowError> {
    let size = registry.len();
    let matrices: Vec<FlowMatrix> = range.iter().map(|p| FlowMatrix::zeros(p, size)).collect();
    if matrices.is_empty() {
        // `PeriodRange` is non-empty by construction; kept as a guard for
        // the stated contract.
        return Err(FlowError::EmptyPeriodRange);
    }
    let mut matrices = matrices;
    for (row, rec) in records.iter().enumerate() {
        let Some(offset) = range.offset_of(&rec.period) else {
            continue;
        };
        let i = registry
            .index_of(&rec.origin)
            .ok_or_else(|| FlowError::UnknownRegion {
                row,
                name: rec.origin.0.clone(),
            })?;
        let j = registry
            .index_of(&rec.destination)
            .ok_or_else(|| FlowError::UnknownRegion {
                row,
                name: rec.destination.0.clone(),
            })?;
        let cell = matrices[offset].entries[i * size + j]
            .expect("freshly built matrices have no missing cells");
        matrices[offset].entries[i * size + j] = Some(cell + rec.count);
    }
    Ok(matrices)
}

/// Shares of region `i`'s flow volume by direction, aggregated over all
/// periods: `(inflow, internal, outflow)` proportions summing to one.
/// Missing aggregates are skipped period by period.
pub fn flow_proportions(
    matrices: &[FlowMatrix],
    registry: &RegionRegistry,
    i: usize,
) -> Result<(f64, f64, f64), FlowError> {
    let mut inflow: u64 = 0;
    let mut internal: u64 = 0;
    let mut outflow: u64 = 0;
    for m in matrices {
        if let Some(v) = m.total_inflow(i)? {
            inflow += v;
        }
        if let Some(v) = m.internal_displacement(i)? {
            internal += v;
        }
        if let Some(v) = m.total_outflow(i)? {
            outflow += v;
        }
    }
    let total = inflow + internal + outflow;
    if total == 0 {
        return Err(FlowError::NoFlows {
            name: registry.region(i)?.0.clone(),
        });
    }
    let t = total as f64;
    Ok((inflow as f64 / t, internal as f64 / t, outflow as f64 / t))
}

/// Masks a per-period count series: with `zero_as_missing`, every zero
/// becomes missing. Returns the masked series and the missing proportion.
pub fn apply_missingness(
    series: &[Option<u64>],
    zero_as_missing: bool,
) -> (Vec<Option<u64>>, f64) {
    let masked: Vec<Option<u64>> = series
        .iter()
        .map(|v| match v {
            Some(0) if zero_as_missing => None,
            other => *other,
        })
        .collect();
    let missing = masked.iter().filter(|v| v.is_none()).count();
    let proportion = if masked.is_empty() {
        0.0
    } else {
        missing as f64 / masked.len() as f64
    };
    (masked, proportion)
}

//! CSV readers for the file-based input interfaces.
//!
//! All files are UTF-8, comma-separated, with a fixed header row:
//!
//! - flows: `period,origin,destination,count` (period as `YYYY-MM`)
//! - regions: `region`
//! - adjacency: `region_a,region_b`
//! - distances: `origin,destination,km`
//! - events: `date,region,kind,fatalities` (date as `YYYY-MM-DD`)
//! - feature tables: `period,region,<feature1>,<feature2>,...` where an
//!   empty cell is a missing value
//!
//! Errors carry the offending line number so callers can surface row-level
//! diagnostics.

use std::collections::BTreeMap;
use std::path::Path;

use csv::StringRecord;

use super::events::{CalendarDate, EventRecord};
use super::{FlowError, FlowRecord, RegionId, RegionRegistry};
use crate::period::Period;

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>, FlowError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: csv::Error) -> FlowError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FlowError::Io {
            path: path.display().to_string(),
            source: io,
        },
        other => FlowError::MalformedRow {
            row: 0,
            reason: format!("{other:?}"),
        },
    }
}

fn check_header(
    path: &Path,
    found: &StringRecord,
    expected: &[&str],
) -> Result<(), FlowError> {
    let found: Vec<String> = found.iter().map(|s| s.trim().to_string()).collect();
    if found != expected {
        return Err(FlowError::BadHeader {
            path: path.display().to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    Ok(())
}

fn line_of(record: &StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn malformed(row: usize, reason: impl Into<String>) -> FlowError {
    FlowError::MalformedRow {
        row,
        reason: reason.into(),
    }
}

fn records(
    reader: &mut csv::Reader<std::fs::File>,
    path: &Path,
) -> Result<Vec<StringRecord>, FlowError> {
    let mut out = Vec::new();
    for rec in reader.records() {
        out.push(rec.map_err(|e| io_error(path, e))?);
    }
    Ok(out)
}

/// Reads the region list that fixes registry order.
pub fn read_regions(path: &Path) -> Result<Vec<RegionId>, FlowError> {
    let mut reader = open(path)?;
    check_header(path, reader.headers().map_err(|e| io_error(path, e))?, &["region"])?;
    let mut regions = Vec::new();
    for rec in records(&mut reader, path)? {
        let name = rec.get(0).unwrap_or("").trim();
        if name.is_empty() {
            return Err(malformed(line_of(&rec), "empty region name"));
        }
        regions.push(RegionId::new(name));
    }
    Ok(regions)
}

/// Adds `region_a,region_b` pairs to the registry's adjacency set.
pub fn read_adjacency(path: &Path, registry: &mut RegionRegistry) -> Result<(), FlowError> {
    let mut reader = open(path)?;
    check_header(
        path,
        reader.headers().map_err(|e| io_error(path, e))?,
        &["region_a", "region_b"],
    )?;
    for rec in records(&mut reader, path)? {
        let row = line_of(&rec);
        let a = RegionId::new(rec.get(0).unwrap_or("").trim());
        let b = RegionId::new(rec.get(1).unwrap_or("").trim());
        registry.add_adjacency(&a, &b).map_err(|e| match e {
            FlowError::UnknownRegion { name, .. } => FlowError::UnknownRegion { row, name },
            other => other,
        })?;
    }
    Ok(())
}

/// Adds directed `origin,destination,km` distances to the registry.
pub fn read_distances(path: &Path, registry: &mut RegionRegistry) -> Result<(), FlowError> {
    let mut reader = open(path)?;
    check_header(
        path,
        reader.headers().map_err(|e| io_error(path, e))?,
        &["origin", "destination", "km"],
    )?;
    for rec in records(&mut reader, path)? {
        let row = line_of(&rec);
        let origin = RegionId::new(rec.get(0).unwrap_or("").trim());
        let destination = RegionId::new(rec.get(1).unwrap_or("").trim());
        let km: f64 = rec
            .get(2)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| malformed(row, format!("bad distance {:?}", rec.get(2).unwrap_or(""))))?;
        registry
            .set_distance(&origin, &destination, km)
            .map_err(|e| match e {
                FlowError::UnknownRegion { name, .. } => FlowError::UnknownRegion { row, name },
                other => other,
            })?;
    }
    Ok(())
}

/// Reads flow records, keeping duplicate `(period, origin, destination)`
/// rows; they are summed when matrices are built.
pub fn read_flows(path: &Path, registry: &RegionRegistry) -> Result<Vec<FlowRecord>, FlowError> {
    let mut reader = open(path)?;
    check_header(
        path,
        reader.headers().map_err(|e| io_error(path, e))?,
        &["period", "origin", "destination", "count"],
    )?;
    let mut out = Vec::new();
    for rec in records(&mut reader, path)? {
        let row = line_of(&rec);
        let period: Period = rec
            .get(0)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|e: crate::period::PeriodParseError| malformed(row, e.to_string()))?;
        let origin = RegionId::new(rec.get(1).unwrap_or("").trim());
        let destination = RegionId::new(rec.get(2).unwrap_or("").trim());
        for region in [&origin, &destination] {
            if registry.index_of(region).is_none() {
                return Err(FlowError::UnknownRegion {
                    row,
                    name: region.0.clone(),
                });
            }
        }
        let raw = rec.get(3).unwrap_or("").trim();
        let count: i64 = raw
            .parse()
            .map_err(|_| malformed(row, format!("bad count {raw:?}")))?;
        if count < 0 {
            return Err(FlowError::NegativeCount { row, value: count });
        }
        out.push(FlowRecord {
            period,
            origin,
            destination,
            count: count as u64,
        });
    }
    Ok(out)
}

/// Reads conflict-event records with calendar-day dates.
pub fn read_events(path: &Path, registry: &RegionRegistry) -> Result<Vec<EventRecord>, FlowError> {
    let mut reader = open(path)?;
    check_header(
        path,
        reader.headers().map_err(|e| io_error(path, e))?,
        &["date", "region", "kind", "fatalities"],
    )?;
    let mut out = Vec::new();
    for rec in records(&mut reader, path)? {
        let row = line_of(&rec);
        let raw_date = rec.get(0).unwrap_or("").trim();
        let date: CalendarDate = raw_date.parse().map_err(|_| FlowError::UnparseableDate {
            row,
            value: raw_date.to_string(),
        })?;
        let region = RegionId::new(rec.get(1).unwrap_or("").trim());
        if registry.index_of(&region).is_none() {
            return Err(FlowError::UnknownRegion {
                row,
                name: region.0.clone(),
            });
        }
        let kind = rec.get(2).unwrap_or("").trim().to_string();
        let raw = rec.get(3).unwrap_or("").trim();
        let fatalities: i64 = raw
            .parse()
            .map_err(|_| malformed(row, format!("bad fatalities {raw:?}")))?;
        if fatalities < 0 {
            return Err(FlowError::NegativeCount {
                row,
                value: fatalities,
            });
        }
        out.push(EventRecord {
            date,
            region,
            kind,
            fatalities: fatalities as u64,
        });
    }
    Ok(out)
}

/// A contextual-indicator table keyed by `(region, period)`. Cells absent
/// from the file (or left empty) are missing.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub cells: BTreeMap<(usize, Period), Vec<Option<f64>>>,
}

/// Reads a `period,region,<feature...>` table. Empty cells are missing.
pub fn read_feature_table(
    path: &Path,
    registry: &RegionRegistry,
) -> Result<FeatureTable, FlowError> {
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| io_error(path, e))?.clone();
    let names: Vec<String> = headers.iter().map(|s| s.trim().to_string()).collect();
    if names.len() < 3 || names[0] != "period" || names[1] != "region" {
        return Err(FlowError::BadHeader {
            path: path.display().to_string(),
            expected: vec!["period".into(), "region".into(), "<feature...>".into()],
            found: names,
        });
    }
    let columns: Vec<String> = names[2..].to_vec();
    let mut cells = BTreeMap::new();
    for rec in records(&mut reader, path)? {
        let row = line_of(&rec);
        let period: Period = rec
            .get(0)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|e: crate::period::PeriodParseError| malformed(row, e.to_string()))?;
        let region = RegionId::new(rec.get(1).unwrap_or("").trim());
        let region_idx = registry
            .index_of(&region)
            .ok_or_else(|| FlowError::UnknownRegion {
                row,
                name: region.0.clone(),
            })?;
        let mut values = Vec::with_capacity(columns.len());
        for (k, column) in columns.iter().enumerate() {
            let raw = rec.get(k + 2).unwrap_or("").trim();
            if raw.is_empty() {
                values.push(None);
            } else {
                let v: f64 = raw
                    .parse()
                    .map_err(|_| malformed(row, format!("bad value {raw:?} in {column}")))?;
                values.push(Some(v));
            }
        }
        cells.insert((region_idx, period), values);
    }
    Ok(FeatureTable { columns, cells })
}

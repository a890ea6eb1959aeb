//! Conflict-event records and their monthly (region, period) aggregation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FlowError, RegionId, RegionRegistry};
use crate::period::{Period, PeriodRange};

/// A calendar day, validated against month lengths and leap years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CalendarDate {
    year: i32,
    month: u8,
    day: u8,
}

fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
            if leap {
                29
            } else {
                28
            }
        }
        _ => 0,
    }
}

impl CalendarDate {
    pub fn new(year: i32, month: u8, day: u8) -> Option<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return None;
        }
        Some(CalendarDate { year, month, day })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    pub fn day(&self) -> u8 {
        self.day
    }

    /// The monthly bucket this day falls into.
    pub fn period(&self) -> Period {
        Period::new(self.year, self.month).expect("validated on construction")
    }
}

impl fmt::Display for CalendarDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for CalendarDate {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.splitn(3, '-');
        let year: i32 = parts.next().ok_or(())?.parse().map_err(|_| ())?;
        let month: u8 = parts.next().ok_or(())?.parse().map_err(|_| ())?;
        let day: u8 = parts.next().ok_or(())?.parse().map_err(|_| ())?;
        CalendarDate::new(year, month, day).ok_or(())
    }
}

/// One conflict/violence incident.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub date: CalendarDate,
    pub region: RegionId,
    pub kind: String,
    pub fatalities: u64,
}

/// Incident counts and fatality sums per (region, period) bucket, dense
/// over the full grid (zero where no events occurred).
#[derive(Debug, Clone, PartialEq)]
pub struct EventAggregates {
    pub range: PeriodRange,
    n_regions: usize,
    cells: Vec<(u64, u64)>, // (incidents, fatalities), region-major
}

impl EventAggregates {
    pub fn get(&self, region: usize, period: &Period) -> Option<(u64, u64)> {
        let offset = self.range.offset_of(period)?;
        if region >= self.n_regions {
            return None;
        }
        Some(self.cells[region * self.range.len() + offset])
    }
}

/// Buckets events by the calendar month they fall in. Events outside the
/// period range are ignored; unknown regions are an error.
pub fn aggregate_events(
    events: &[EventRecord],
    registry: &RegionRegistry,
    range: PeriodRange,
) -> Result<EventAggregates, FlowError> {
    let n_regions = registry.len();
    let n_periods = range.len();
    let mut cells = vec![(0u64, 0u64); n_regions * n_periods];
    for (row, ev) in events.iter().enumerate() {
        let region = registry
            .index_of(&ev.region)
            .ok_or_else(|| FlowError::UnknownRegion {
                row,
                name: ev.region.0.clone(),
            })?;
        let Some(offset) = range.offset_of(&ev.date.period()) else {
            continue;
        };
        let cell = &mut cells[region * n_periods + offset];
        cell.0 += 1;
        cell.1 += ev.fatalities;
    }
    Ok(EventAggregates {
        range,
        n_regions,
        cells,
    })
}

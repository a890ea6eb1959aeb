//! Monthly calendar periods and contiguous period ranges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A calendar month, e.g. `2019-03`. Totally ordered; arithmetic wraps
/// months across year boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    year: i32,
    month: u8,
}

impl Period {
    pub fn new(year: i32, month: u8) -> Result<Self, PeriodParseError> {
        if !(1..=12).contains(&month) {
            return Err(PeriodParseError {
                input: format!("{year}-{month}"),
                reason: "month must be in 1..=12",
            });
        }
        Ok(Period { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    /// Linear month index (`year * 12 + month - 1`); the basis for all
    /// period arithmetic.
    pub fn index(&self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_index(index: i64) -> Self {
        let year = index.div_euclid(12);
        let month = index.rem_euclid(12) + 1;
        Period {
            year: year as i32,
            month: month as u8,
        }
    }

    pub fn add_months(&self, months: i64) -> Self {
        Period::from_index(self.index() + months)
    }

    pub fn succ(&self) -> Self {
        self.add_months(1)
    }

    pub fn pred(&self) -> Self {
        self.add_months(-1)
    }

    /// Signed number of months from `other` to `self`.
    pub fn months_since(&self, other: &Period) -> i64 {
        self.index() - other.index()
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodParseError {
    pub input: String,
    pub reason: &'static str,
}

impl fmt::Display for PeriodParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid period {:?}: {}", self.input, self.reason)
    }
}

impl std::error::Error for PeriodParseError {}

impl FromStr for Period {
    type Err = PeriodParseError;

    /// Parses the `YYYY-MM` form used by all file interfaces.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| PeriodParseError {
            input: s.to_string(),
            reason,
        };
        let (y, m) = s.split_once('-').ok_or_else(|| err("expected YYYY-MM"))?;
        let year: i32 = y.parse().map_err(|_| err("year is not an integer"))?;
        let month: u8 = m.parse().map_err(|_| err("month is not an integer"))?;
        Period::new(year, month).map_err(|_| err("month must be in 1..=12"))
    }
}

impl Serialize for Period {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive, contiguous range of periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodRange {
    pub start: Period,
    pub end: Period,
}

impl PeriodRange {
    /// Returns `None` when `end` precedes `start`.
    pub fn new(start: Period, end: Period) -> Option<Self> {
        if end < start {
            None
        } else {
            Some(PeriodRange { start, end })
        }
    }

    pub fn len(&self) -> usize {
        (self.end.index() - self.start.index() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees start <= end
    }

    pub fn contains(&self, p: &Period) -> bool {
        *p >= self.start && *p <= self.end
    }

    pub fn iter(self) -> impl Iterator<Item = Period> {
        (self.start.index()..=self.end.index()).map(Period::from_index)
    }

    /// Position of `p` within the range, if contained.
    pub fn offset_of(&self, p: &Period) -> Option<usize> {
        if self.contains(p) {
            Some((p.index() - self.start.index()) as usize)
        } else {
            None
        }
    }
}

impl fmt::Display for PeriodRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let p: Period = "2019-03".parse().unwrap();
        assert_eq!(p.year(), 2019);
        assert_eq!(p.month(), 3);
        assert_eq!(p.to_string(), "2019-03");
    }

    #[test]
    fn rejects_bad_months() {
        assert!("2019-00".parse::<Period>().is_err());
        assert!("2019-13".parse::<Period>().is_err());
        assert!("2019".parse::<Period>().is_err());
        assert!("2019-3x".parse::<Period>().is_err());
    }

    #[test]
    fn successor_wraps_year_boundary() {
        let dec: Period = "2018-12".parse().unwrap();
        assert_eq!(dec.succ().to_string(), "2019-01");
        assert_eq!(dec.succ().pred(), dec);
    }

    #[test]
    fn months_since_crosses_years() {
        let a: Period = "2010-01".parse().unwrap();
        let b: Period = "2011-01".parse().unwrap();
        assert_eq!(b.months_since(&a), 12);
        assert_eq!(a.months_since(&b), -12);
    }

    #[test]
    fn ordering_is_total() {
        let a: Period = "2018-12".parse().unwrap();
        let b: Period = "2019-01".parse().unwrap();
        assert!(a < b);
    }

    #[test]
    fn range_iteration_and_offsets() {
        let r = PeriodRange::new("2018-11".parse().unwrap(), "2019-02".parse().unwrap()).unwrap();
        let all: Vec<String> = r.iter().map(|p| p.to_string()).collect();
        assert_eq!(all, vec!["2018-11", "2018-12", "2019-01", "2019-02"]);
        assert_eq!(r.len(), 4);
        assert_eq!(r.offset_of(&"2019-01".parse().unwrap()), Some(2));
        assert_eq!(r.offset_of(&"2020-01".parse().unwrap()), None);
    }

    #[test]
    fn range_rejects_reversed_bounds() {
        assert!(PeriodRange::new("2019-02".parse().unwrap(), "2019-01".parse().unwrap()).is_none());
    }

    #[test]
    fn serde_uses_display_form() {
        let p: Period = "2019-03".parse().unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "\"2019-03\"");
        let back: Period = serde_json::from_str("\"2019-03\"").unwrap();
        assert_eq!(back, p);
    }
}

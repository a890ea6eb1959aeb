//! Lag, neighbor, missingness-flag, imputation, and standardization
//! operations on an assembled panel.
//!
//! Lag indexing convention: for a row with target period `t` and issuance
//! `s = t - h`, lag `k` reads the value at period `s - (k - 1)`. Lag 1 is
//! therefore the most recent value observable when the forecast is issued.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::flow::RegionRegistry;
use crate::period::PeriodRange;

use super::{ColumnMeta, ColumnSource, PanelError, PanelTable};

/// Which regions contribute neighbor copies of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborMode {
    Adjacent,
    All,
}

impl PanelTable {
    /// Offset into a region's period-indexed series for the lag-`k` source
    /// period of the row at period offset `t_off`, if it is in range.
    fn lag_source_offset(&self, t_off: usize, k: u32) -> Option<usize> {
        let shift = self.task.horizon as i64 + k as i64 - 1; // t - (s - (k-1))
        let q = t_off as i64 - shift;
        if q >= 0 {
            Some(q as usize)
        } else {
            None
        }
    }

    fn lagged_values(&self, series: &[Option<f64>], region: usize, k: u32) -> Vec<Option<f64>> {
        let n = self.range.len();
        let base = region * n;
        (0..n)
            .map(|t_off| {
                self.lag_source_offset(t_off, k)
                    .and_then(|q| series[base + q])
            })
            .collect()
    }

    /// Adds `target_lag_k` columns holding issuance-respecting past values
    /// of the target series.
    pub fn add_target_lags(&mut self, lags: &[u32]) -> Result<(), PanelError> {
        if lags.contains(&0) {
            return Err(PanelError::InvalidLag);
        }
        for &k in lags {
            let mut values = Vec::with_capacity(self.n_rows());
            for r in 0..self.regions.len() {
                values.extend(self.lagged_values(&self.target, r, k));
            }
            self.push_column(
                format!("target_lag_{k}"),
                ColumnMeta {
                    source: ColumnSource::Target,
                    lag: Some(k),
                    origin_region: None,
                    is_missing_flag: false,
                },
                values,
            )?;
        }
        Ok(())
    }

    /// Adds `<column>_lag_k` columns for raw feature columns, with the same
    /// indexing contract as target lags.
    pub fn add_feature_lags(&mut self, columns: &[String], lags: &[u32]) -> Result<(), PanelError> {
        if lags.contains(&0) {
            return Err(PanelError::InvalidLag);
        }
        for name in columns {
            let column = self
                .column(name)
                .ok_or_else(|| PanelError::UnknownColumn(name.clone()))?;
            if column.meta.source != ColumnSource::Feature
                || column.meta.lag.is_some()
                || column.meta.is_missing_flag
            {
                return Err(PanelError::InvalidLagBase(name.clone()));
            }
            let source_values = column.values.clone();
            for &k in lags {
                let mut values = Vec::with_capacity(self.n_rows());
                for r in 0..self.regions.len() {
                    values.extend(self.lagged_values(&source_values, r, k));
                }
                self.push_column(
                    format!("{name}_lag_{k}"),
                    ColumnMeta {
                        source: ColumnSource::Feature,
                        lag: Some(k),
                        origin_region: None,
                        is_missing_flag: false,
                    },
                    values,
                )?;
            }
        }
        Ok(())
    }

    /// For each selected column `c` and each contributing region `r'`, adds
    /// `c_from_r'` holding `r'`'s value of `c` at the row's own period.
    /// Cells are missing on rows whose region is not paired with `r'` under
    /// the mode (non-adjacent, or the row's own region).
    pub fn add_neighbor_features(
        &mut self,
        registry: &RegionRegistry,
        columns: &[String],
        mode: NeighborMode,
    ) -> Result<(), PanelError> {
        if mode == NeighborMode::Adjacent && !registry.has_adjacency() {
            return Err(PanelError::MissingAdjacency);
        }
        let n_regions = self.regions.len();
        let n_periods = self.range.len();
        let applies = |row_region: usize, source_region: usize| -> bool {
            if row_region == source_region {
                return false;
            }
            match mode {
                NeighborMode::All => true,
                NeighborMode::Adjacent => registry.are_adjacent(row_region, source_region),
            }
        };
        for name in columns {
            let column = self
                .column(name)
                .ok_or_else(|| PanelError::UnknownColumn(name.clone()))?;
            let meta = column.meta.clone();
            let source_values = column.values.clone();
            for source in 0..n_regions {
                if !(0..n_regions).any(|r| applies(r, source)) {
                    continue;
                }
                let mut values = Vec::with_capacity(self.n_rows());
                for r in 0..n_regions {
                    for t_off in 0..n_periods {
                        values.push(if applies(r, source) {
                            source_values[source * n_periods + t_off]
                        } else {
                            None
                        });
                    }
                }
                let source_id = self.regions[source].clone();
                self.push_column(
                    format!("{name}_from_{source_id}"),
                    ColumnMeta {
                        origin_region: Some(source_id),
                        ..meta.clone()
                    },
                    values,
                )?;
            }
        }
        Ok(())
    }

    /// Adds a `<column>_missing` 0/1 indicator for each named column. Flags
    /// themselves are never missing; original values are untouched. Run
    /// this before imputation so the missingness signal survives the fill.
    pub fn add_missingness_flags(&mut self, columns: &[String]) -> Result<(), PanelError> {
        for name in columns {
            let column = self
                .column(name)
                .ok_or_else(|| PanelError::UnknownColumn(name.clone()))?;
            let meta = column.meta.clone();
            let values: Vec<Option<f64>> = column
                .values
                .iter()
                .map(|v| Some(if v.is_none() { 1.0 } else { 0.0 }))
                .collect();
            self.push_column(
                format!("{name}_missing"),
                ColumnMeta {
                    is_missing_flag: true,
                    ..meta
                },
                values,
            )?;
        }
        Ok(())
    }

    /// Replaces each missing cell with the most recent earlier value within
    /// the same region; series heads with no history become zero.
    pub fn impute_forward_fill(&mut self, columns: &[String]) -> Result<(), PanelError> {
        let n_regions = self.regions.len();
        let n_periods = self.range.len();
        for name in columns {
            let column = self
                .column_mut(name)
                .ok_or_else(|| PanelError::UnknownColumn(name.clone()))?;
            for r in 0..n_regions {
                let mut last: f64 = 0.0;
                for t_off in 0..n_periods {
                    let cell = &mut column.values[r * n_periods + t_off];
                    match cell {
                        Some(v) => last = *v,
                        None => *cell = Some(last),
                    }
                }
            }
        }
        Ok(())
    }

    /// Standardizes every non-flag column to z-scores using mean and
    /// population standard deviation computed from rows whose target period
    /// lies in `train_range`; the same statistics are reused verbatim
    /// elsewhere. Constant columns become all-zero. Returns the per-column
    /// statistics.
    pub fn standardize_features(
        &mut self,
        train_range: &PeriodRange,
    ) -> Result<BTreeMap<String, (f64, f64)>, PanelError> {
        let keys: Vec<(usize, crate::period::Period)> = self.rows().collect();
        let mut stats = BTreeMap::new();
        for column in &mut self.columns {
            if column.meta.is_missing_flag {
                continue;
            }
            let train_cells: Vec<f64> = keys
                .iter()
                .zip(&column.values)
                .filter(|((_, p), _)| train_range.contains(p))
                .filter_map(|(_, v)| *v)
                .collect();
            let (mean, sd) = population_stats(&train_cells);
            for x in column.values.iter_mut().flatten() {
                *x = if sd == 0.0 { 0.0 } else { (*x - mean) / sd };
            }
            stats.insert(column.name.clone(), (mean, sd));
        }
        Ok(stats)
    }
}

/// Mean and population (divide-by-n) standard deviation; `(0, 0)` for an
/// empty sample.
pub fn population_stats(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::tests::{panel_from_series, period, registry, task};
    use crate::panel::{AssembleOptions, PanelTable};
    use crate::flow::{build_flow_matrices, FeatureTable};

    fn feature_panel(h: u32, values: &[(usize, &str, f64)]) -> PanelTable {
        // Three regions, five periods, one feature column "f".
        let reg = registry(&["r1", "r2", "r3"]);
        let range = PeriodRange::new(period("2019-01"), period("2019-05")).unwrap();
        let matrices = build_flow_matrices(&[], &reg, range).unwrap();
        let mut cells = std::collections::BTreeMap::new();
        for &(r, p, v) in values {
            cells.insert((r, period(p)), vec![Some(v)]);
        }
        let table = FeatureTable {
            columns: vec!["f".into()],
            cells,
        };
        PanelTable::assemble(&matrices, &[table], &reg, task(h), &AssembleOptions::default())
            .unwrap()
    }

    #[test]
    fn target_lags_respect_issuance_at_h1() {
        // y(1..5) = [10,20,30,40,50]
        let mut panel = panel_from_series(
            &["r1"],
            "2019-01",
            &[vec![10, 20, 30, 40, 50]],
            1,
            false,
        );
        panel.add_target_lags(&[1, 2]).unwrap();
        let row = panel.row_index(0, &period("2019-05")).unwrap();
        assert_eq!(panel.column("target_lag_1").unwrap().values()[row], Some(40.0));
        assert_eq!(panel.column("target_lag_2").unwrap().values()[row], Some(30.0));
    }

    #[test]
    fn target_lags_respect_issuance_at_h3() {
        let mut panel = panel_from_series(
            &["r1"],
            "2019-01",
            &[vec![10, 20, 30, 40, 50]],
            3,
            false,
        );
        panel.add_target_lags(&[1]).unwrap();
        let row = panel.row_index(0, &period("2019-05")).unwrap();
        assert_eq!(panel.column("target_lag_1").unwrap().values()[row], Some(20.0));
    }

    #[test]
    fn lags_beyond_history_are_missing() {
        let mut panel = panel_from_series(&["r1"], "2019-01", &[vec![10, 20, 30]], 1, false);
        panel.add_target_lags(&[1]).unwrap();
        let first = panel.row_index(0, &period("2019-01")).unwrap();
        assert_eq!(panel.column("target_lag_1").unwrap().values()[first], None);
    }

    #[test]
    fn mutating_post_issuance_targets_leaves_lags_unchanged() {
        let build = |tail: &[u64]| {
            let mut series = vec![10, 20, 30];
            series.extend_from_slice(tail);
            let mut panel = panel_from_series(&["r1"], "2019-01", &[series], 1, false);
            panel.add_target_lags(&[1, 2]).unwrap();
            panel
        };
        let a = build(&[40, 50]);
        let b = build(&[999, 7]);
        // Row t=2019-04 has issuance 2019-03; periods after it differ between
        // the two builds but every lag column at that row must agree.
        let row = a.row_index(0, &period("2019-04")).unwrap();
        for name in ["target_lag_1", "target_lag_2"] {
            assert_eq!(
                a.column(name).unwrap().values()[row],
                b.column(name).unwrap().values()[row]
            );
        }
    }

    #[test]
    fn feature_lags_match_indexing_contract() {
        let mut panel = feature_panel(
            1,
            &[(0, "2019-01", 1.0), (0, "2019-02", 2.0), (0, "2019-03", 3.0)],
        );
        panel.add_feature_lags(&["f".into()], &[1]).unwrap();
        let row = panel.row_index(0, &period("2019-03")).unwrap();
        assert_eq!(panel.column("f_lag_1").unwrap().values()[row], Some(2.0));
        let first = panel.row_index(0, &period("2019-01")).unwrap();
        assert_eq!(panel.column("f_lag_1").unwrap().values()[first], None);
    }

    #[test]
    fn feature_lag_rejects_engineered_bases() {
        let mut panel = feature_panel(1, &[(0, "2019-01", 1.0)]);
        panel.add_feature_lags(&["f".into()], &[1]).unwrap();
        assert!(matches!(
            panel.add_feature_lags(&["f_lag_1".into()], &[1]),
            Err(PanelError::InvalidLagBase(_))
        ));
        assert!(matches!(
            panel.add_feature_lags(&["nope".into()], &[1]),
            Err(PanelError::UnknownColumn(_))
        ));
    }

    #[test]
    fn neighbor_features_adjacent_mode() {
        let mut panel = feature_panel(1, &[(1, "2019-01", 5.0), (2, "2019-01", 9.0)]);
        let mut reg = registry(&["r1", "r2", "r3"]);
        reg.add_adjacency(
            &crate::flow::RegionId::new("r1"),
            &crate::flow::RegionId::new("r2"),
        )
        .unwrap();
        panel
            .add_neighbor_features(&reg, &["f".into()], NeighborMode::Adjacent)
            .unwrap();
        let row = panel.row_index(0, &period("2019-01")).unwrap();
        assert_eq!(panel.column("f_from_r2").unwrap().values()[row], Some(5.0));
        // r3 is not adjacent to anything, so no column was created for it.
        assert!(panel.column("f_from_r3").is_none());
    }

    #[test]
    fn neighbor_features_all_mode_counts() {
        let mut panel = feature_panel(
            1,
            &[(0, "2019-01", 1.0), (1, "2019-01", 5.0), (2, "2019-01", 9.0)],
        );
        let reg = registry(&["r1", "r2", "r3"]);
        panel
            .add_neighbor_features(&reg, &["f".into()], NeighborMode::All)
            .unwrap();
        for src in 1..=3 {
            assert!(panel.column(&format!("f_from_r{src}")).is_some());
        }
        // Each row sees exactly the two other regions' values.
        let row = panel.row_index(0, &period("2019-01")).unwrap();
        assert_eq!(panel.column("f_from_r2").unwrap().values()[row], Some(5.0));
        assert_eq!(panel.column("f_from_r3").unwrap().values()[row], Some(9.0));
        assert_eq!(panel.column("f_from_r1").unwrap().values()[row], None);
        let applicable = (1..=3)
            .filter(|src| {
                panel.column(&format!("f_from_r{src}")).unwrap().values()[row].is_some()
            })
            .count();
        assert_eq!(applicable, 2);
    }

    #[test]
    fn neighbor_mode_adjacent_requires_adjacency() {
        let mut panel = feature_panel(1, &[]);
        let reg = registry(&["r1", "r2", "r3"]);
        assert!(matches!(
            panel.add_neighbor_features(&reg, &["f".into()], NeighborMode::Adjacent),
            Err(PanelError::MissingAdjacency)
        ));
    }

    #[test]
    fn missingness_flags_are_binary_and_total() {
        let mut panel = feature_panel(1, &[(0, "2019-01", 0.0)]);
        panel.add_missingness_flags(&["f".into()]).unwrap();
        let flag = panel.column("f_missing").unwrap();
        assert!(flag.meta.is_missing_flag);
        let present = panel.row_index(0, &period("2019-01")).unwrap();
        assert_eq!(flag.values()[present], Some(0.0)); // zero is a value
        let absent = panel.row_index(0, &period("2019-02")).unwrap();
        assert_eq!(flag.values()[absent], Some(1.0));
        assert!(flag.values().iter().all(|v| v.is_some()));
        // Originals untouched.
        assert_eq!(panel.column("f").unwrap().values()[absent], None);
    }

    #[test]
    fn forward_fill_fixture() {
        // [MISSING, 5, MISSING, MISSING, 7] -> [0, 5, 5, 5, 7]
        let mut panel = feature_panel(1, &[(0, "2019-02", 5.0), (0, "2019-05", 7.0)]);
        panel.impute_forward_fill(&["f".into()]).unwrap();
        let values: Vec<Option<f64>> = (0..5)
            .map(|k| {
                let row = panel
                    .row_index(0, &period("2019-01").add_months(k))
                    .unwrap();
                panel.column("f").unwrap().values()[row]
            })
            .collect();
        assert_eq!(
            values,
            vec![Some(0.0), Some(5.0), Some(5.0), Some(5.0), Some(7.0)]
        );
    }

    #[test]
    fn forward_fill_all_missing_becomes_zero_and_is_idempotent() {
        let mut panel = feature_panel(1, &[]);
        panel.impute_forward_fill(&["f".into()]).unwrap();
        assert!(panel
            .column("f")
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == Some(0.0)));
        let once = panel.column("f").unwrap().values().to_vec();
        panel.impute_forward_fill(&["f".into()]).unwrap();
        assert_eq!(panel.column("f").unwrap().values(), &once[..]);
    }

    #[test]
    fn forward_fill_never_reads_later_periods() {
        let build = |late: f64| {
            let mut panel = feature_panel(1, &[(0, "2019-02", 5.0), (0, "2019-05", late)]);
            panel.impute_forward_fill(&["f".into()]).unwrap();
            panel
        };
        let a = build(7.0);
        let b = build(123.0);
        for k in 0..4 {
            let p = period("2019-01").add_months(k);
            let row = a.row_index(0, &p).unwrap();
            assert_eq!(
                a.column("f").unwrap().values()[row],
                b.column("f").unwrap().values()[row]
            );
        }
    }

    #[test]
    fn standardize_uses_training_statistics_only() {
        // Region r1 carries train values [0, 10]; a later test-row value of
        // 20 must standardize against the train stats: (20-5)/5 = 3.
        let mut panel = feature_panel(
            1,
            &[(0, "2019-01", 0.0), (0, "2019-02", 10.0), (0, "2019-03", 20.0)],
        );
        let train = PeriodRange::new(period("2019-01"), period("2019-02")).unwrap();
        let stats = panel.standardize_features(&train).unwrap();
        assert_eq!(stats["f"], (5.0, 5.0));
        let test_row = panel.row_index(0, &period("2019-03")).unwrap();
        assert_eq!(panel.column("f").unwrap().values()[test_row], Some(3.0));
    }

    #[test]
    fn standardize_zeroes_constant_columns() {
        let mut panel = feature_panel(
            1,
            &[(0, "2019-01", 4.0), (0, "2019-02", 4.0), (1, "2019-01", 4.0)],
        );
        let train = PeriodRange::new(period("2019-01"), period("2019-05")).unwrap();
        panel.standardize_features(&train).unwrap();
        assert!(panel
            .column("f")
            .unwrap()
            .values()
            .iter()
            .flatten()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn standardized_train_rows_have_zero_mean_unit_sd() {
        let mut panel = feature_panel(
            1,
            &[
                (0, "2019-01", 1.0),
                (0, "2019-02", 2.0),
                (1, "2019-01", 7.0),
                (2, "2019-02", -3.0),
            ],
        );
        let train = PeriodRange::new(period("2019-01"), period("2019-02")).unwrap();
        panel.standardize_features(&train).unwrap();
        let keys: Vec<(usize, crate::period::Period)> = (0..3)
            .flat_map(|r| {
                ["2019-01", "2019-02"]
                    .iter()
                    .map(move |p| (r, period(p)))
                    .collect::<Vec<_>>()
            })
            .collect();
        let cells: Vec<f64> = keys
            .iter()
            .filter_map(|(r, p)| {
                let row = panel.row_index(*r, p).unwrap();
                panel.column("f").unwrap().values()[row]
            })
            .collect();
        let (mean, sd) = population_stats(&cells);
        assert!(mean.abs() < 1e-12);
        assert!((sd - 1.0).abs() < 1e-12);
    }
}

//! Shared builders for synthetic panels used across integration tests.


use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fdf_core::flow::{
    build_flow_matrices, FeatureTable, FlowRecord, RegionId, RegionRegistry,
};
use fdf_core::panel::{
    AssembleOptions, ForecastTask, PanelTable, TargetKind, TargetTransform,
};
use fdf_core::period::{Period, PeriodRange};

pub fn period(s: &str) -> Period {
    s.parse().unwrap()
}

pub fn registry(names: &[&str]) -> RegionRegistry {
    RegionRegistry::new(names.iter().map(|n| RegionId::new(*n)).collect()).unwrap()
}

pub fn task(h: u32) -> ForecastTask {
    ForecastTask::new(h, TargetKind::Arrivals, TargetTransform::Identity).unwrap()
}

/// Raw synthetic inputs: per-region arrival series (as internal
/// displacement) and one feature table.
#[derive(Clone)]
pub struct RawInputs {
    pub names: Vec<String>,
    pub start: Period,
    pub arrivals: Vec<Vec<u64>>,
    pub feature: Vec<Vec<f64>>, // column "driver", same shape
}

impl RawInputs {
    pub fn n_periods(&self) -> usize {
        self.arrivals[0].len()
    }

    pub fn range(&self) -> PeriodRange {
        PeriodRange::new(self.start, self.start.add_months(self.n_periods() as i64 - 1))
            .unwrap()
    }

    pub fn build_panel(&self, h: u32, zero_as_missing: bool) -> PanelTable {
        let reg = registry(&self.names.iter().map(|s| s.as_str()).collect::<Vec<_>>());
        let records: Vec<FlowRecord> = self
            .arrivals
            .iter()
            .enumerate()
            .flat_map(|(r, series)| {
                let name = self.names[r].clone();
                let start = self.start;
                series.iter().enumerate().map(move |(t, &count)| FlowRecord {
                    period: start.add_months(t as i64),
                    origin: RegionId::new(name.clone()),
                    destination: RegionId::new(name.clone()),
                    count,
                })
            })
            .collect();
        let matrices = build_flow_matrices(&records, &reg, self.range()).unwrap();
        let mut cells = BTreeMap::new();
        for (r, series) in self.feature.iter().enumerate() {
            for (t, &v) in series.iter().enumerate() {
                cells.insert((r, self.start.add_months(t as i64)), vec![Some(v)]);
            }
        }
        let table = FeatureTable {
            columns: vec!["driver".into()],
            cells,
        };
        let mut panel = PanelTable::assemble(
            &matrices,
            &[table],
            &reg,
            task(h),
            &AssembleOptions {
                zero_as_missing,
                ..AssembleOptions::default()
            },
        )
        .unwrap();
        panel.add_target_lags(&[1, 2, 3]).unwrap();
        panel
            .add_feature_lags(&["driver".into()], &[1, 2])
            .unwrap();
        let lagged: Vec<String> = vec!["driver_lag_1".into(), "driver_lag_2".into()];
        panel.add_missingness_flags(&lagged).unwrap();
        panel.impute_forward_fill(&lagged).unwrap();
        panel
    }
}

/// Arrivals driven linearly by the previous period's feature value plus
/// bounded noise: `arrivals(r, t) = base + gain * driver(r, t-1) + e`.
pub fn feature_driven_inputs(seed: u64, n_regions: usize, n_periods: usize) -> RawInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=n_regions).map(|i| format!("r{i}")).collect();
    let mut feature = Vec::with_capacity(n_regions);
    let mut arrivals = Vec::with_capacity(n_regions);
    for _ in 0..n_regions {
        let driver: Vec<f64> = (0..n_periods).map(|_| rng.gen_range(0.0..20.0)).collect();
        let series: Vec<u64> = (0..n_periods)
            .map(|t| {
                let lagged = if t == 0 { 10.0 } else { driver[t - 1] };
                let noise: f64 = rng.gen_range(-5.0..5.0);
                (200.0 + 15.0 * lagged + noise).round().max(1.0) as u64
            })
            .collect();
        feature.push(driver);
        arrivals.push(series);
    }
    RawInputs {
        names,
        start: period("2015-01"),
        arrivals,
        feature,
    }
}

/// Seasonal arrivals: a 12-month sinusoid per region plus noise, with a
/// noisy feature that carries no signal.
pub fn seasonal_inputs(seed: u64, n_regions: usize, n_periods: usize) -> RawInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=n_regions).map(|i| format!("r{i}")).collect();
    let mut feature = Vec::with_capacity(n_regions);
    let mut arrivals = Vec::with_capacity(n_regions);
    for r in 0..n_regions {
        let base = rng.gen_range(500.0..1500.0);
        let phase = r as f64 * 0.7;
        let series: Vec<u64> = (0..n_periods)
            .map(|t| {
                let angle = 2.0 * std::f64::consts::PI * (t % 12) as f64 / 12.0 + phase;
                let noise: f64 = rng.gen_range(-0.08..0.08);
                (base * (1.0 + 0.5 * angle.sin()) + base * noise).round().max(1.0) as u64
            })
            .collect();
        arrivals.push(series);
        feature.push((0..n_periods).map(|_| rng.gen_range(0.0..1.0)).collect());
    }
    RawInputs {
        names,
        start: period("2011-01"),
        arrivals,
        feature,
    }
}

/// Replaces arrivals and features at every period strictly after `cutoff`
/// with junk values; used by anti-leakage perturbation tests.
pub fn scramble_after(inputs: &RawInputs, cutoff: Period) -> RawInputs {
    let mut out = inputs.clone();
    let cut_off = (cutoff.months_since(&inputs.start) + 1).max(0) as usize;
    for series in &mut out.arrivals {
        for value in series.iter_mut().skip(cut_off) {
            *value = value.wrapping_mul(31).wrapping_add(977) % 100_000;
        }
    }
    for series in &mut out.feature {
        for value in series.iter_mut().skip(cut_off) {
            *value = *value * -3.7 + 1234.5;
        }
    }
    out
}

//! The end-to-end pipeline: load and validate inputs, assemble and
//! engineer one panel per horizon, select hyperparameters by rolling-origin
//! cross-validation on the training partition, then score the zoo on the
//! holdout split.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fdf_core::evaluation::{
    cross_validate, expanding_splits, holdout_evaluate, sliding_splits, ScoreReport, SplitPlan,
};
use fdf_core::flow::{
    aggregate_events, build_flow_matrices, read_adjacency, read_distances, read_events,
    read_feature_table, read_flows, read_regions, FeatureTable, FlowRecord, RegionRegistry,
};
use fdf_core::models::Estimator;
use fdf_core::panel::{
    AssembleOptions, ColumnSource, ForecastTask, PanelTable, TransformState,
};
use fdf_core::period::PeriodRange;

use crate::config::{CvConfig, PipelineConfig};
use crate::manifest::RunManifest;
use crate::CliError;

pub struct LoadedInputs {
    pub registry: RegionRegistry,
    pub records: Vec<FlowRecord>,
    pub feature_tables: Vec<FeatureTable>,
    pub range: PeriodRange,
    pub digested_paths: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn input_error(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Reads and validates every configured input file. The panel period range
/// is the span of the flow records.
pub fn load_inputs(config: &PipelineConfig, base: &Path) -> Result<LoadedInputs, CliError> {
    let mut digested = Vec::new();
    let mut track = |p: PathBuf| -> PathBuf {
        digested.push(p.clone());
        p
    };

    let regions_path = track(config.resolve(base, &config.paths.regions));
    let regions = read_regions(&regions_path).map_err(input_error)?;
    let mut registry = RegionRegistry::new(regions).map_err(input_error)?;

    if let Some(path) = &config.paths.adjacency {
        let path = track(config.resolve(base, path));
        read_adjacency(&path, &mut registry).map_err(input_error)?;
    }
    if let Some(path) = &config.paths.distances {
        let path = track(config.resolve(base, path));
        read_distances(&path, &mut registry).map_err(input_error)?;
    }

    let flows_path = track(config.resolve(base, &config.paths.flows));
    let records = read_flows(&flows_path, &registry).map_err(input_error)?;
    if records.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no flow records",
            flows_path.display()
        )));
    }
    let start = records.iter().map(|r| r.period).min().unwrap();
    let end = records.iter().map(|r| r.period).max().unwrap();
    let range = PeriodRange::new(start, end).expect("min <= max");

    let mut warnings = Vec::new();
    let mut feature_tables = Vec::new();
    if let Some(path) = &config.paths.events {
        let path = track(config.resolve(base, path));
        let events = read_events(&path, &registry).map_err(input_error)?;
        let aggregates = aggregate_events(&events, &registry, range).map_err(input_error)?;
        let outside = events
            .iter()
            .filter(|e| !range.contains(&e.date.period()))
            .count();
        if outside > 0 {
            warnings.push(format!(
                "{outside} events fall outside the flow period range and were ignored"
            ));
        }
        let mut cells = BTreeMap::new();
        for r in 0..registry.len() {
            for p in range.iter() {
                let (incidents, fatalities) = aggregates.get(r, &p).expect("dense grid");
                cells.insert((r, p), vec![Some(incidents as f64), Some(fatalities as f64)]);
            }
        }
        feature_tables.push(FeatureTable {
            columns: vec!["incidents".into(), "fatalities".into()],
            cells,
        });
    }
    for path in &config.paths.features {
        let path = track(config.resolve(base, path));
        feature_tables.push(read_feature_table(&path, &registry).map_err(input_error)?);
    }

    Ok(LoadedInputs {
        registry,
        records,
        feature_tables,
        range,
        digested_paths: digested,
        warnings,
    })
}

/// Assembles and engineers the panel for one horizon: mask, transform,
/// target lags, feature lags, neighbor copies, missingness flags, and
/// forward-fill imputation (flags first, so missingness stays informative).
/// Target lags are never imputed; rows with unobservable target history
/// drop out of model training and prediction instead.
pub fn build_panel(
    inputs: &LoadedInputs,
    config: &PipelineConfig,
    horizon: u32,
) -> Result<(PanelTable, TransformState), CliError> {
    let eval_error = |e: fdf_core::panel::PanelError| CliError::Evaluation(e.to_string());
    let matrices = build_flow_matrices(&inputs.records, &inputs.registry, inputs.range)
        .map_err(input_error)?;
    let task = ForecastTask::new(
        horizon,
        config.task.target.clone(),
        config.task.transform.clone(),
    )
    .map_err(eval_error)?;
    let mut panel = PanelTable::assemble(
        &matrices,
        &inputs.feature_tables,
        &inputs.registry,
        task,
        &AssembleOptions {
            zero_as_missing: config.panel.zero_as_missing,
            ..AssembleOptions::default()
        },
    )
    .map_err(eval_error)?;

    if !inputs.range.contains(&config.evaluation.train_end) {
        return Err(CliError::Evaluation(format!(
            "train_end {} outside the data range {}",
            config.evaluation.train_end, inputs.range
        )));
    }
    let train_range = PeriodRange::new(inputs.range.start, config.evaluation.train_end)
        .expect("contains() checked");
    let state = panel
        .transform_target(&config.task.transform, Some(&train_range))
        .map_err(eval_error)?;

    panel
        .add_target_lags(&config.panel.target_lags)
        .map_err(eval_error)?;
    let raw_features = panel.raw_feature_columns();
    if !raw_features.is_empty() {
        panel
            .add_feature_lags(&raw_features, &config.panel.feature_lags)
            .map_err(eval_error)?;
    }

    let lagged_features = |panel: &PanelTable| -> Vec<String> {
        panel
            .columns()
            .iter()
            .filter(|c| {
                c.meta.source == ColumnSource::Feature
                    && c.meta.lag.is_some()
                    && !c.meta.is_missing_flag
            })
            .map(|c| c.name.clone())
            .collect()
    };
    if let Some(mode) = config.panel.neighbor_mode.mode() {
        let columns = lagged_features(&panel);
        if !columns.is_empty() {
            panel
                .add_neighbor_features(&inputs.registry, &columns, mode)
                .map_err(|e| CliError::Input(e.to_string()))?;
        }
    }
    let engineered = lagged_features(&panel);
    if !engineered.is_empty() {
        panel.add_missingness_flags(&engineered).map_err(eval_error)?;
        if config.panel.impute {
            panel.impute_forward_fill(&engineered).map_err(eval_error)?;
        }
    }
    Ok((panel, state))
}

fn cv_plan(config: &PipelineConfig, train_range: PeriodRange) -> Result<SplitPlan, CliError> {
    let plan = match config.evaluation.cv {
        CvConfig::Expanding { k, min_train } => expanding_splits(train_range, k, min_train),
        CvConfig::Sliding { k, train_len } => sliding_splits(train_range, k, train_len),
    };
    plan.map_err(|e| CliError::Evaluation(e.to_string()))
}

/// Cross-validation selection plus holdout scoring for every configured
/// horizon, merged into one report. Families whose whole grid fails
/// selection are skipped with a warning rather than aborting the run.
pub fn run_evaluation(
    config: &PipelineConfig,
    base: &Path,
    command: &str,
) -> Result<(ScoreReport, RunManifest), CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new(command, config.seed, &config.canonical_json());
    let inputs = load_inputs(config, base)?;
    for path in &inputs.digested_paths {
        manifest.digest_input(path)?;
    }
    for warning in &inputs.warnings {
        manifest.warn(warning.clone());
    }
    manifest.record_timing("load_inputs", started.elapsed());

    let mut selected: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    let mut pieces = Vec::new();
    for &horizon in &config.task.horizons {
        let stage = Instant::now();
        let (panel, transform_state) = build_panel(&inputs, config, horizon)?;
        manifest.record_timing(&format!("build_panel_h{horizon}"), stage.elapsed());

        let train_range = PeriodRange::new(panel.range().start, config.evaluation.train_end)
            .expect("validated in build_panel");
        let plan = cv_plan(config, train_range)?;

        let stage = Instant::now();
        let mut zoo: Vec<(String, Estimator)> = config.benchmark_models();
        for family in config.family_grids() {
            let chosen = if family.grid.len() == 1 {
                Some(family.grid[0].clone())
            } else {
                match cross_validate(
                    &family.grid,
                    &panel,
                    &plan,
                    &config.evaluation.metric,
                    None,
                ) {
                    Ok(outcome) => Some(outcome.best().estimator.clone()),
                    Err(e) => {
                        manifest.warn(format!(
                            "h{horizon}: {} selection failed and the family was skipped: {e}",
                            family.name
                        ));
                        None
                    }
                }
            };
            if let Some(estimator) = chosen {
                selected.insert(
                    format!("h{horizon}/{}", family.name),
                    serde_json::to_value(&estimator.spec).expect("specs serialize"),
                );
                zoo.push((family.name, estimator));
            }
        }
        manifest.record_timing(&format!("select_h{horizon}"), stage.elapsed());
        if zoo.is_empty() {
            return Err(CliError::Evaluation("no usable models".into()));
        }

        let stage = Instant::now();
        let piece = holdout_evaluate(
            &panel,
            &zoo,
            config.evaluation.train_end,
            &config.evaluation.metric,
            &transform_state,
            config.seed,
        )
        .map_err(|e| CliError::Evaluation(e.to_string()))?;
        manifest.record_timing(&format!("holdout_h{horizon}"), stage.elapsed());
        pieces.push(piece);
    }

    let mut report = ScoreReport::merge(pieces)
        .ok_or_else(|| CliError::Evaluation("no horizons produced a report".into()))?;
    report.warnings = manifest.warnings.clone();
    manifest.selected_specs = selected;
    manifest.record_timing("total", started.elapsed());
    Ok((report, manifest))
}

/// Builds and writes the engineered panel artifact for every horizon.
pub fn run_ingest(
    config: &PipelineConfig,
    base: &Path,
    out_dir: &Path,
) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("ingest", config.seed, &config.canonical_json());
    let inputs = load_inputs(config, base)?;
    for path in &inputs.digested_paths {
        manifest.digest_input(path)?;
    }
    for warning in &inputs.warnings {
        manifest.warn(warning.clone());
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    for &horizon in &config.task.horizons {
        let (panel, _) = build_panel(&inputs, config, horizon)?;
        let csv = panel.to_csv_string();
        let name = format!("panel_h{horizon}.csv");
        let path = out_dir.join(&name);
        std::fs::write(&path, &csv)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        manifest.digest_output(&name, csv.as_bytes());
    }
    manifest.record_timing("total", started.elapsed());
    Ok(manifest)
}

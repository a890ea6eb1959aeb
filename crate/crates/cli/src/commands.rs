//! Command implementations shared by the binary and the integration tests.

use std::path::Path;

use fdf_core::evaluation::ScoreReport;

use crate::config::PipelineConfig;
use crate::pipeline::{run_evaluation, run_ingest};
use crate::render;
use crate::synth::{generate_dataset, Scenario};
use crate::CliError;

/// Validates inputs and writes the engineered panel artifact per horizon,
/// plus the ingest manifest.
pub fn cmd_ingest(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let (config, base) = PipelineConfig::load(config_path)?;
    let manifest = run_ingest(&config, &base, out_dir)?;
    write(out_dir, "ingest_manifest.json", manifest.to_json().as_bytes())?;
    Ok(())
}

/// Runs selection and holdout evaluation, writing `report.json`,
/// `report.csv`, and `manifest.json`.
pub fn cmd_evaluate(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    command: &str,
) -> Result<(), CliError> {
    let (mut config, base) = PipelineConfig::load(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let (report, mut manifest) = run_evaluation(&config, &base, command)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    let json = report.to_json();
    let csv = report.to_csv();
    manifest.digest_output("report.json", json.as_bytes());
    manifest.digest_output("report.csv", csv.as_bytes());
    write(out_dir, "report.json", json.as_bytes())?;
    write(out_dir, "report.csv", csv.as_bytes())?;
    write(out_dir, "manifest.json", manifest.to_json().as_bytes())?;
    Ok(())
}

pub enum ReportFormat {
    Table,
    Svg,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "svg" => Ok(ReportFormat::Svg),
            other => Err(format!("unknown format {other:?} (expected table or svg)")),
        }
    }
}

/// Re-renders a persisted report without re-training. `table` returns the
/// text to print; `svg` writes one chart per region plus a rank heatmap
/// and returns the written file names.
pub fn cmd_report(
    report_path: &Path,
    format: &ReportFormat,
    out_dir: &Path,
) -> Result<String, CliError> {
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| CliError::Report(format!("cannot read {}: {e}", report_path.display())))?;
    let report = ScoreReport::from_json(&text)
        .map_err(|e| CliError::Report(format!("malformed report: {e}")))?;
    if report.schema_version != ScoreReport::SCHEMA_VERSION {
        return Err(CliError::Report(format!(
            "unsupported report schema_version {}",
            report.schema_version
        )));
    }
    match format {
        ReportFormat::Table => Ok(render::render_table(&report)),
        ReportFormat::Svg => {
            let Some(&first_horizon) = report.horizons.first() else {
                return Err(CliError::Report("report has no horizons".into()));
            };
            std::fs::create_dir_all(out_dir).map_err(|e| {
                CliError::Report(format!("cannot create {}: {e}", out_dir.display()))
            })?;
            let mut written = Vec::new();
            for block in report.series.iter().filter(|b| b.horizon == first_horizon) {
                let name = format!("chart_{}.svg", render::file_stem(&block.region));
                let svg = render::render_region_chart(&report, block);
                write_report(out_dir, &name, svg.as_bytes())?;
                written.push(name);
            }
            let heatmap = render::render_rank_heatmap(&report, first_horizon);
            write_report(out_dir, "rank_heatmap.svg", heatmap.as_bytes())?;
            written.push("rank_heatmap.svg".to_string());
            Ok(written.join("\n"))
        }
    }
}

/// Generates a synthetic dataset with a ready-to-run config.
pub fn cmd_synth(
    scenario: Scenario,
    seed: u64,
    n_regions: usize,
    n_periods: usize,
    out_dir: &Path,
) -> Result<(), CliError> {
    generate_dataset(scenario, seed, n_regions, n_periods, out_dir)?;
    Ok(())
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(dir.join(name), bytes)
        .map_err(|e| CliError::Input(format!("cannot write {name}: {e}")))
}

fn write_report(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(dir.join(name), bytes)
        .map_err(|e| CliError::Report(format!("cannot write {name}: {e}")))
}

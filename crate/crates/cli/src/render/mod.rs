//! Report rendering: an aligned text table of train/test scores per model
//! and horizon, and deterministic SVG artifacts (per-region prediction
//! charts plus a per-region rank heatmap).

mod svg;

pub use svg::{render_rank_heatmap, render_region_chart};

use fdf_core::evaluation::{Partition, ScoreReport};

/// Fixed formatting to six significant digits; keeps artifacts
/// byte-stable across runs and platforms.
pub fn sig6(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    if magnitude >= 6 {
        let scale = 10f64.powi(magnitude - 5);
        return format!("{:.0}", (value / scale).round() * scale);
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Renders the score table: one row per model, one train and one test
/// column per horizon, `-` where a model was structurally omitted.
pub fn render_table(report: &ScoreReport) -> String {
    let mut header: Vec<String> = vec!["Model".to_string()];
    for h in &report.horizons {
        header.push(format!("{h}-month Train"));
        header.push(format!("{h}-month Test"));
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for model in &report.models {
        let mut row = vec![model.clone()];
        for &h in &report.horizons {
            for partition in [Partition::Train, Partition::Test] {
                row.push(
                    report
                        .overall_score(model, h, partition)
                        .map(sig6)
                        .unwrap_or_else(|| "-".to_string()),
                );
            }
        }
        rows.push(row);
    }

    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let fmt_row = |cells: &[String]| -> String {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i == 0 {
                line.push_str(&format!("{:<width$}", cell, width = widths[0]));
            } else {
                line.push_str(&format!("  {:>width$}", cell, width = widths[i]));
            }
        }
        line
    };

    let mut out = String::new();
    out.push_str(&format!(
        "Scores ({}), train {} / test {}\n",
        report.metric.name(),
        report.train_range,
        report.test_range
    ));
    out.push_str(&fmt_row(&header));
    out.push('\n');
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for row in &rows {
        out.push_str(&fmt_row(row));
        out.push('\n');
    }
    if !report.omitted.is_empty() {
        out.push('\n');
        for omitted in &report.omitted {
            out.push_str(&format!(
                "- {} at the {}-month horizon: {}\n",
                omitted.model, omitted.horizon, omitted.reason
            ));
        }
    }
    out
}

/// Safe file stem for a region name.
pub fn file_stem(region: &str) -> String {
    region
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

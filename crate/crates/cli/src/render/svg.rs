//! Deterministic SVG rendering: no timestamps, fixed palette, fixed float
//! formatting, so identical reports produce identical bytes.

use std::fmt::Write as _;

use fdf_core::evaluation::{Partition, ScoreReport, SeriesBlock};

use super::sig6;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const CHART_WIDTH: f64 = 900.0;
const CHART_HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 40.0;

/// Models drawn in a chart: the best test performers at the horizon, in
/// report display order, capped at five.
fn chart_models(report: &ScoreReport, horizon: u32) -> Vec<String> {
    let mut scored: Vec<(f64, String)> = report
        .entries
        .iter()
        .filter(|e| e.horizon == horizon && e.region.is_none() && e.partition == Partition::Test)
        .map(|e| (e.score, e.model.clone()))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    scored.into_iter().take(5).map(|(_, m)| m).collect()
}

/// Path data for a possibly gappy series; gaps restart the line.
fn series_path(values: &[Option<f64>], x_of: impl Fn(usize) -> f64, y_of: impl Fn(f64) -> f64) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for (i, value) in values.iter().enumerate() {
        match value {
            Some(v) => {
                let command = if pen_down { 'L' } else { 'M' };
                let _ = write!(d, "{command}{} {} ", sig6(x_of(i)), sig6(y_of(*v)));
                pen_down = true;
            }
            None => pen_down = false,
        }
    }
    d.trim_end().to_string()
}

/// One region's actual-versus-predicted line chart with the test range
/// shaded.
pub fn render_region_chart(report: &ScoreReport, block: &SeriesBlock) -> String {
    let n = block.actual.len().max(2);
    let models = chart_models(report, block.horizon);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut consider = |v: f64| {
        lo = lo.min(v);
        hi = hi.max(v);
    };
    for v in block.actual.iter().flatten() {
        consider(*v);
    }
    for model in &models {
        if let Some(series) = block.predictions.get(model) {
            for v in series.iter().flatten() {
                consider(*v);
            }
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi == lo {
        hi = lo + 1.0;
    }

    let plot_w = CHART_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = CHART_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |i: usize| MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64;
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">",
        CHART_WIDTH as u32, CHART_HEIGHT as u32, CHART_WIDTH as u32, CHART_HEIGHT as u32
    );
    let _ = write!(
        svg,
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>",
        CHART_WIDTH as u32, CHART_HEIGHT as u32
    );

    // Shade the test range.
    let test_start = report.test_range.start.months_since(&report.periods.start) as usize;
    if test_start < n {
        let x0 = x_of(test_start);
        let _ = write!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#ececec\"/>",
            sig6(x0),
            sig6(MARGIN_TOP),
            sig6(x_of(n - 1) - x0),
            sig6(plot_h)
        );
    }

    // Axes and labels.
    let _ = write!(
        svg,
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>",
        l = sig6(MARGIN_LEFT),
        r = sig6(MARGIN_LEFT + plot_w),
        t = sig6(MARGIN_TOP),
        b = sig6(MARGIN_TOP + plot_h)
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"16\">{} (horizon {})</text>",
        sig6(MARGIN_LEFT),
        block.region,
        block.horizon
    );
    let _ = write!(
        svg,
        "<text x=\"{x}\" y=\"{y0}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{hi}</text>\
         <text x=\"{x}\" y=\"{y1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{lo}</text>",
        x = sig6(MARGIN_LEFT - 6.0),
        y0 = sig6(MARGIN_TOP + 10.0),
        y1 = sig6(MARGIN_TOP + plot_h),
        hi = sig6(hi),
        lo = sig6(lo),
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{y}\" font-family=\"monospace\" font-size=\"11\">{}</text>\
         <text x=\"{}\" y=\"{y}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{}</text>",
        sig6(MARGIN_LEFT),
        report.periods.start,
        sig6(MARGIN_LEFT + plot_w),
        report.periods.end,
        y = sig6(MARGIN_TOP + plot_h + 16.0),
    );

    // Actual series in black, predictions in palette colors.
    let path = series_path(&block.actual, x_of, y_of);
    if !path.is_empty() {
        let _ = write!(
            svg,
            "<path d=\"{path}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>"
        );
    }
    let legend_x = MARGIN_LEFT + plot_w + 14.0;
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">actual</text>\
         <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"2\"/>",
        sig6(legend_x + 24.0),
        sig6(MARGIN_TOP + 12.0),
        sig6(legend_x),
        sig6(MARGIN_TOP + 8.0),
        sig6(legend_x + 20.0),
        sig6(MARGIN_TOP + 8.0)
    );
    for (k, model) in models.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if let Some(series) = block.predictions.get(model) {
            let path = series_path(series, x_of, y_of);
            if !path.is_empty() {
                let _ = write!(
                    svg,
                    "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>"
                );
            }
        }
        let ly = MARGIN_TOP + 12.0 + 16.0 * (k + 1) as f64;
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\
             <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{}</text>",
            sig6(legend_x),
            sig6(ly - 4.0),
            sig6(legend_x + 20.0),
            sig6(ly - 4.0),
            sig6(legend_x + 24.0),
            sig6(ly),
            xml_escape(model)
        );
    }
    svg.push_str("</svg>");
    svg
}

fn lerp(a: (u8, u8, u8), b: (u8, u8, u8), t: f64) -> (u8, u8, u8) {
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * t).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Green (best) through yellow to red (worst).
fn rank_color(rank: f64, n_models: usize) -> String {
    let t = if n_models <= 1 {
        0.0
    } else {
        ((rank - 1.0) / (n_models as f64 - 1.0)).clamp(0.0, 1.0)
    };
    let green = (46, 139, 87);
    let yellow = (255, 215, 0);
    let red = (178, 34, 34);
    let (r, g, b) = if t < 0.5 {
        lerp(green, yellow, t * 2.0)
    } else {
        lerp(yellow, red, (t - 0.5) * 2.0)
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Heatmap of per-region model ranks on the test partition at one horizon.
pub fn render_rank_heatmap(report: &ScoreReport, horizon: u32) -> String {
    let mut regions: Vec<String> = report
        .entries
        .iter()
        .filter(|e| e.horizon == horizon && e.partition == Partition::Test)
        .filter_map(|e| e.region.clone())
        .collect();
    regions.sort();
    regions.dedup();
    let models: Vec<String> = report
        .models
        .iter()
        .filter(|m| {
            report.entries.iter().any(|e| {
                e.horizon == horizon
                    && e.partition == Partition::Test
                    && e.region.is_some()
                    && &e.model == *m
            })
        })
        .cloned()
        .collect();

    let cell = 42.0;
    let left = 140.0;
    let top = 110.0;
    let width = left + cell * models.len() as f64 + 20.0;
    let height = top + cell * regions.len() as f64 + 20.0;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\"><rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>",
        w = sig6(width),
        h = sig6(height)
    );
    let _ = write!(
        svg,
        "<text x=\"10\" y=\"24\" font-family=\"monospace\" font-size=\"15\">Test-partition model ranks by region (horizon {horizon})</text>"
    );
    for (j, model) in models.iter().enumerate() {
        let x = left + cell * (j as f64 + 0.5);
        let _ = write!(
            svg,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"start\" transform=\"rotate(-50 {x} {y})\">{}</text>",
            xml_escape(model),
            x = sig6(x),
            y = sig6(top - 8.0)
        );
    }
    for (i, region) in regions.iter().enumerate() {
        let y = top + cell * (i as f64 + 0.65);
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"end\">{}</text>",
            sig6(left - 8.0),
            xml_escape(region),
            y = sig6(y)
        );
        for (j, model) in models.iter().enumerate() {
            let rank = report.entries.iter().find(|e| {
                e.horizon == horizon
                    && e.partition == Partition::Test
                    && e.region.as_deref() == Some(region.as_str())
                    && &e.model == model
            });
            let x = left + cell * j as f64;
            let y0 = top + cell * i as f64;
            match rank {
                Some(entry) => {
                    let _ = write!(
                        svg,
                        "<rect x=\"{x}\" y=\"{y}\" width=\"{c}\" height=\"{c}\" \
                         fill=\"{color}\" stroke=\"white\"/>\
                         <text x=\"{tx}\" y=\"{ty}\" font-family=\"monospace\" font-size=\"12\" \
                         text-anchor=\"middle\">{label}</text>",
                        x = sig6(x),
                        y = sig6(y0),
                        c = sig6(cell),
                        color = rank_color(entry.rank, models.len()),
                        tx = sig6(x + cell / 2.0),
                        ty = sig6(y0 + cell * 0.62),
                        label = if entry.rank.fract() == 0.0 {
                            format!("{}", entry.rank as i64)
                        } else {
                            format!("{:.1}", entry.rank)
                        }
                    );
                }
                None => {
                    let _ = write!(
                        svg,
                        "<rect x=\"{x}\" y=\"{y}\" width=\"{c}\" height=\"{c}\" \
                         fill=\"#f5f5f5\" stroke=\"white\"/>",
                        x = sig6(x),
                        y = sig6(y0),
                        c = sig6(cell)
                    );
                }
            }
        }
    }
    svg.push_str("</svg>");
    svg
}

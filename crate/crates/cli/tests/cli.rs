//! End-to-end tests of the `fdf` binary: exit codes, artifact shapes, and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fdf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fdf"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = fdf().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "fdf {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn synth_small(dir: &Path) -> PathBuf {
    run_ok(&[
        "synth",
        "--scenario",
        "seasonal",
        "--seed",
        "9",
        "--regions",
        "4",
        "--periods",
        "36",
        "--out",
        dir.to_str().unwrap(),
    ]);
    dir.join("config.json")
}

#[test]
fn ingest_writes_full_grid_panels_with_stable_digests() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_small(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "ingest",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    for h in [1, 3] {
        let a = read(&out_a.join(format!("panel_h{h}.csv")));
        let b = read(&out_b.join(format!("panel_h{h}.csv")));
        assert_eq!(a, b, "panel_h{h} differs between reruns");
        // header + |regions| x |periods| rows
        assert_eq!(a.lines().count(), 1 + 4 * 36);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out_a.join("ingest_manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "ingest");
    assert!(manifest["outputs"].as_array().unwrap().len() == 2);
}

#[test]
fn negative_count_fails_ingest_with_exit_2_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_small(dir.path());
    // Corrupt one flow row.
    let flows_path = dir.path().join("flows.csv");
    let mut flows: Vec<String> = read(&flows_path).lines().map(String::from).collect();
    flows[3] = {
        let mut parts: Vec<&str> = flows[3].split(',').collect();
        parts[3] = "-5";
        parts.join(",")
    };
    std::fs::write(&flows_path, flows.join("\n") + "\n").unwrap();

    let output = fdf()
        .args([
            "ingest",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("row 4"), "stderr must name the row: {stderr}");
    assert!(stderr.contains("-5"));
}

#[test]
fn evaluate_is_byte_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_small(dir.path());
    let runs = ["r1", "r2", "r3"];
    for (i, run) in runs.iter().enumerate() {
        let mut cmd = fdf();
        cmd.args([
            "evaluate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().join(run).to_str().unwrap(),
        ]);
        if i == 2 {
            cmd.env("FDF_THREADS", "1");
        }
        let output = cmd.output().unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }
    let a = read(&dir.path().join("r1/report.json"));
    let b = read(&dir.path().join("r2/report.json"));
    let c = read(&dir.path().join("r3/report.json"));
    assert_eq!(a, b, "reruns must be byte-identical");
    assert_eq!(a, c, "parallel and single-threaded runs must agree");
    assert_eq!(
        read(&dir.path().join("r1/report.csv")),
        read(&dir.path().join("r3/report.csv"))
    );
}

#[test]
fn train_is_an_alias_for_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_small(dir.path());
    run_ok(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("t").to_str().unwrap(),
    ]);
    run_ok(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("e").to_str().unwrap(),
    ]);
    assert_eq!(
        read(&dir.path().join("t/report.json")),
        read(&dir.path().join("e/report.json"))
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("t/manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "train");
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_small(dir.path());
    run_ok(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("s").to_str().unwrap(),
        "--seed",
        "777",
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("s/report.json"))).unwrap();
    assert_eq!(report["seed"], 777);
}

#[test]
fn report_table_has_one_column_pair_per_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_small(dir.path());
    let out = dir.path().join("eval");
    run_ok(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let output = run_ok(&[
        "report",
        "--report",
        out.join("report.json").to_str().unwrap(),
        "--format",
        "table",
    ]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    let header = stdout
        .lines()
        .find(|l| l.starts_with("Model"))
        .expect("table header");
    // 1 model column + {train, test} per horizon, split on 2+ spaces.
    let columns: Vec<&str> = header.split("  ").filter(|s| !s.trim().is_empty()).collect();
    assert_eq!(columns.len(), 1 + 2 * 2);
    // The infeasible 1-month lag shows "-" cells at the 3-month horizon.
    let lag_row = stdout
        .lines()
        .find(|l| l.starts_with("Lag (1)"))
        .expect("lag row");
    assert!(lag_row.trim_end().ends_with('-'));
}

#[test]
fn report_svg_writes_per_region_charts_and_heatmap_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_small(dir.path());
    let out = dir.path().join("eval");
    run_ok(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let svg_a = dir.path().join("svg_a");
    let svg_b = dir.path().join("svg_b");
    for svg in [&svg_a, &svg_b] {
        run_ok(&[
            "report",
            "--report",
            out.join("report.json").to_str().unwrap(),
            "--format",
            "svg",
            "--out",
            svg.to_str().unwrap(),
        ]);
    }
    let mut names: Vec<String> = std::fs::read_dir(&svg_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec![
            "chart_R01.svg",
            "chart_R02.svg",
            "chart_R03.svg",
            "chart_R04.svg",
            "rank_heatmap.svg"
        ]
    );
    for name in &names {
        assert_eq!(
            read(&svg_a.join(name)),
            read(&svg_b.join(name)),
            "{name} differs between renders"
        );
    }
}

#[test]
fn malformed_report_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("report.json");
    std::fs::write(&bogus, "{\"not\": \"a report\"}").unwrap();
    let output = fdf()
        .args(["report", "--report", bogus.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn synth_rejects_bad_parameters_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = fdf()
        .args([
            "synth",
            "--scenario",
            "seasonal",
            "--regions",
            "1",
            "--periods",
            "36",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let output = fdf()
        .args([
            "synth",
            "--scenario",
            "volcanic",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn evaluation_failures_emit_machine_readable_errors_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = synth_small(dir.path());
    // train_end beyond the data range is an evaluation-stage failure.
    let mut config: serde_json::Value = serde_json::from_str(&read(&config_path)).unwrap();
    config["evaluation"]["train_end"] = serde_json::json!("2030-01");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let output = fdf()
        .args([
            "evaluate",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    let json_line = stderr
        .lines()
        .find(|l| l.starts_with('{'))
        .expect("machine-readable error line");
    let parsed: serde_json::Value = serde_json::from_str(json_line).unwrap();
    assert_eq!(parsed["error"], "evaluation");
    assert_eq!(parsed["exit_code"], 3);
}

#[test]
fn commands_do_not_mutate_their_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_small(dir.path());
    let before: Vec<(String, String)> = ["flows.csv", "regions.csv", "config.json", "events.csv"]
        .iter()
        .map(|n| (n.to_string(), read(&dir.path().join(n))))
        .collect();
    run_ok(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    for (name, contents) in before {
        assert_eq!(read(&dir.path().join(&name)), contents, "{name} was mutated");
    }
}

#[test]
fn log1p_transform_and_mape_metric_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = synth_small(dir.path());
    let mut config: serde_json::Value = serde_json::from_str(&read(&config_path)).unwrap();
    config["task"]["transform"] = serde_json::json!({"kind": "log1p"});
    config["evaluation"]["metric"] = serde_json::json!({"kind": "mape"});
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    let out = dir.path().join("out");
    run_ok(&[
        "evaluate",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    assert_eq!(report["metric"]["kind"], "mape");
    // MAPE is reported in percent on the raw scale; sane magnitudes only.
    for entry in report["entries"].as_array().unwrap() {
        let score = entry["score"].as_f64().unwrap();
        assert!(score.is_finite() && score >= 0.0);
    }
}

#[test]
fn bursty_scenario_evaluates_despite_reporting_gaps() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "synth",
        "--scenario",
        "bursty",
        "--seed",
        "3",
        "--regions",
        "5",
        "--periods",
        "48",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let out = dir.path().join("out");
    run_ok(&[
        "evaluate",
        "--config",
        dir.path().join("config.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    // Zero months are masked, so the common support shrinks but stays
    // usable.
    let entries = report["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
}

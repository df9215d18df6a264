//! End-to-end tests against the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn kdesample(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdesample"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_imbalanced_csv(path: &Path, majority: usize, minority: usize) {
    let mut text = String::from("x0,x1,target\n");
    for i in 0..majority {
        text.push_str(&format!("{}.25,{}.5,neg\n", i, i % 7));
    }
    for i in 0..minority {
        text.push_str(&format!("{}.75,{}.125,pos\n", 100 + i, i % 3));
    }
    std::fs::write(path, text).unwrap();
}

fn csv_label_counts(path: &Path) -> (usize, usize) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut counts = (0, 0);
    for line in text.lines().skip(1) {
        match line.rsplit(',').next().unwrap() {
            "0" => counts.0 += 1,
            "1" => counts.1 += 1,
            other => panic!("unexpected label {other}"),
        }
    }
    counts
}

#[test]
fn resample_ros_balances_a_nine_to_one_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    write_imbalanced_csv(&input, 18, 2);

    let result = kdesample(&[
        "resample",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "ros",
        "--label-column",
        "target",
        "--positive",
        "pos",
        "--seed",
        "3",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    assert_eq!(csv_label_counts(&output), (18, 18));
}

#[test]
fn resample_kde_keeps_original_rows_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    write_imbalanced_csv(&input, 12, 4);

    let result = kdesample(&[
        "resample",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "kde",
        "--label-column",
        "target",
        "--positive",
        "pos",
        "--seed",
        "9",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    assert_eq!(csv_label_counts(&output), (12, 12));

    // The original 16 rows come first, bit-exact in value, labels remapped.
    let input_rows: Vec<Vec<f64>> = std::fs::read_to_string(&input)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .take(2)
                .map(|v| v.parse().unwrap())
                .collect()
        })
        .collect();
    let output_rows: Vec<Vec<f64>> = std::fs::read_to_string(&output)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .take(2)
                .map(|v| v.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(output_rows.len(), 24);
    assert_eq!(&output_rows[..16], &input_rows[..]);
}

fn small_config_json(out_dir: &Path) -> String {
    format!(
        r#"{{
  "datasets": [
    {{"name": "blob", "synthetic": {{"n_majority": 60, "n_minority": 12, "n_features": 3, "class_separation": 2.5}}}}
  ],
  "samplers": [{{"kind": "none"}}, {{"kind": "kde"}}, {{"kind": "ros"}}, {{"kind": "rus"}}],
  "architectures": ["MLP-1", "MLP-2"],
  "train": {{"epochs": 3}},
  "test_fraction": 0.25,
  "n_trials": 2,
  "base_seed": 17,
  "output_dir": {out_dir:?}
}}"#,
        out_dir = out_dir.to_str().unwrap()
    )
}

#[test]
fn run_then_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = dir.path().join("config.json");
    std::fs::write(&config, small_config_json(&out_dir)).unwrap();

    let run = kdesample(&["run", "--config", config.to_str().unwrap()]);
    assert!(run.status.success(), "{run:?}");
    for file in ["report.json", "summary.md", "summary.csv"] {
        assert!(out_dir.join(file).exists(), "{file} missing");
    }
    for arch in ["mlp-1", "mlp-2"] {
        assert!(out_dir.join(format!("macro_f1_{arch}.svg")).exists());
        assert!(out_dir.join(format!("macro_f1_{arch}.csv")).exists());
    }

    // Re-rendering from the saved report reproduces the same tables.
    let report = kdesample(&[
        "report",
        "--from",
        out_dir.join("report.json").to_str().unwrap(),
        "--format",
        "markdown",
    ]);
    assert!(report.status.success(), "{report:?}");
    let rerendered = String::from_utf8(report.stdout).unwrap();
    let original = std::fs::read_to_string(out_dir.join("summary.md")).unwrap();
    assert_eq!(rerendered, original);

    let svg_dir = dir.path().join("charts");
    let svg = kdesample(&[
        "report",
        "--from",
        out_dir.join("report.json").to_str().unwrap(),
        "--format",
        "svg",
        "--out",
        svg_dir.to_str().unwrap(),
    ]);
    assert!(svg.status.success(), "{svg:?}");
    let rerendered_chart = std::fs::read(svg_dir.join("macro_f1_mlp-1.svg")).unwrap();
    let original_chart = std::fs::read(out_dir.join("macro_f1_mlp-1.svg")).unwrap();
    assert_eq!(rerendered_chart, original_chart);
}

#[test]
fn two_runs_produce_identical_reports_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");

    let mut reports = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        std::fs::write(&config, small_config_json(&out_dir)).unwrap();
        let run = kdesample(&["run", "--config", config.to_str().unwrap()]);
        assert!(run.status.success(), "{run:?}");
        let mut value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
                .unwrap();
        for run in value["runs"].as_array_mut().unwrap() {
            run["wall_time_secs"] = 0.0.into();
        }
        reports.push(serde_json::to_string(&value).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn missing_config_fails_and_names_the_path() {
    let result = kdesample(&["run", "--config", "/nonexistent/missing.json"]);
    assert!(!result.status.success());
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(
        stderr.contains("/nonexistent/missing.json"),
        "stderr does not name the path: {stderr}"
    );
}

#[test]
fn resample_rejects_unknown_method() {
    let result = kdesample(&[
        "resample",
        "--input",
        "x.csv",
        "--method",
        "smote",
        "--label-column",
        "y",
        "--positive",
        "1",
        "--seed",
        "0",
        "--output",
        "o.csv",
    ]);
    assert!(!result.status.success());
}

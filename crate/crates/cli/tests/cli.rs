use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schatten-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn matrix_file(dir: &Path, name: &str, rows: usize, cols: usize, re: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let json = serde_json::json!({ "rows": rows, "cols": cols, "re": re, "im": vec![0.0; re.len()] });
    fs::write(&path, json.to_string()).unwrap();
    path
}

fn norm_estimate(dir: &Path, matrix: &Path, p: &str, strategy: &str, tag: &str) -> (Output, Value) {
    let out = dir.join(tag);
    let output = lab(&[
        "norm-estimate",
        "--matrix",
        matrix.to_str().unwrap(),
        "--p",
        p,
        "--strategy",
        strategy,
        "--trials",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    let value = report(&out)["records"][0]["measured"].clone();
    (output, value)
}

fn close(a: &Value, b: f64) -> bool {
    (a.as_f64().unwrap() - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn norm_estimate_diagonal_hilbert_schmidt() {
    let dir = tempfile::tempdir().unwrap();
    let m = matrix_file(dir.path(), "d34.json", 2, 2, &[3.0, 0.0, 0.0, 4.0]);
    for strategy in ["singular_basis_exact", "frame_ensemble"] {
        let (output, measured) = norm_estimate(dir.path(), &m, "2", strategy, strategy);
        assert_eq!(output.status.code(), Some(0), "{strategy}");
        assert!(close(&measured["exact_norm"], 5.0));
        assert!(close(&measured["exact_norm_pow"], 25.0));
        let estimate = measured["estimate"].as_f64().unwrap();
        if strategy == "singular_basis_exact" {
            assert!(close(&measured["estimate"], 25.0));
        } else {
            // p = 2 samples frames with upper bound one, which bracket from below.
            assert!(estimate <= 25.0 + 1e-9 && estimate > 0.0, "{measured}");
        }
    }
    let stdout = String::from_utf8(lab(&["--help"]).stdout).unwrap();
    assert!(stdout.contains("norm-estimate"));
}

#[test]
fn norm_estimate_p4_ensemble_stays_below() {
    let dir = tempfile::tempdir().unwrap();
    let m = matrix_file(dir.path(), "d21.json", 2, 2, &[2.0, 0.0, 0.0, 1.0]);
    let (output, measured) = norm_estimate(dir.path(), &m, "4", "frame_ensemble", "ens");
    assert_eq!(output.status.code(), Some(0));
    assert!(close(&measured["exact_norm"], 17f64.powf(0.25)));
    assert!(measured["estimate"].as_f64().unwrap() <= 17.0 + 1e-9);
    assert!(measured["gap"].as_f64().unwrap() <= 1e-9);
    let samples = fs::read_to_string(dir.path().join("ens/norm_estimate_samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 51);
    for line in samples.lines().skip(1) {
        let sum: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(sum <= 17.0 + 1e-9, "{line}");
    }
}

#[test]
fn norm_estimate_zero_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = matrix_file(dir.path(), "zero.json", 3, 3, &[0.0; 9]);
    for (strategy, p) in [
        ("singular_basis_exact", "1"),
        ("frame_ensemble", "0.5"),
        ("frame_ensemble", "3"),
    ] {
        let (output, measured) = norm_estimate(dir.path(), &m, p, strategy, &format!("{strategy}{p}"));
        assert_eq!(output.status.code(), Some(0));
        for key in ["exact_norm", "exact_norm_pow", "estimate", "gap"] {
            assert_eq!(measured[key].as_f64(), Some(0.0), "{key}");
        }
    }
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(
        lab(&["verify-theorems", "--dim", "0", "--out", out]).status.code(),
        Some(2)
    );
    assert_eq!(lab(&["verify-theorems", "--p-grid", "1,abc"]).status.code(), Some(2));
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{not json").unwrap();
    let args = [
        "norm-estimate",
        "--matrix",
        garbage.to_str().unwrap(),
        "--p",
        "2",
        "--out",
        out,
    ];
    assert_eq!(lab(&args).status.code(), Some(2));

    let m = matrix_file(dir.path(), "ok.json", 1, 1, &[1.0]);
    let args = [
        "norm-estimate",
        "--matrix",
        m.to_str().unwrap(),
        "--p",
        "0",
        "--out",
        out,
    ];
    assert_eq!(lab(&args).status.code(), Some(2));
    let wide = matrix_file(dir.path(), "wide.json", 1, 2, &[1.0, 2.0]);
    let args = [
        "norm-estimate",
        "--matrix",
        wide.to_str().unwrap(),
        "--p",
        "1",
        "--out",
        out,
    ];
    assert_eq!(lab(&args).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    let args = ["bergman", "--config", missing.to_str().unwrap(), "--out", out];
    assert_eq!(lab(&args).status.code(), Some(2));
}

#[test]
fn exit_status_tracks_record_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("growth.json");
    // Grid too short for the divergent series to clear the growth threshold.
    fs::write(&config, r#"{"growth": {"grid": [10, 20], "p": [1.5]}}"#).unwrap();
    let out = dir.path().join("failing");
    let args = [
        "counterexamples",
        "--config",
        config.to_str().unwrap(),
        "--dim",
        "3",
        "--out",
        out.to_str().unwrap(),
    ];
    let output = lab(&args);
    assert_eq!(output.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["summary"]["all_passed"], Value::Bool(false));
    assert!(String::from_utf8(output.stdout)
        .unwrap()
        .contains("FAIL rank_one_divergence p=1.5"));

    fs::write(&config, r#"{"growth": {"p": [0.5, 1]}}"#).unwrap();
    let out = dir.path().join("passing");
    let args = [
        "counterexamples",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(lab(&args).status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["summary"]["failed"], 0);
    for table in [
        "growth_control.csv",
        "growth_rank_one_p0.5.csv",
        "checks_control_series.csv",
    ] {
        assert!(out.join(table).exists(), "{table}");
    }
}

#[test]
fn bergman_campaign_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bergman");
    let output = lab(&["bergman", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let r = report(&out);
    let records = r["records"].as_array().unwrap();
    let tag = |name: &str| records.iter().filter(|x| x["tag"] == name).count();
    assert_eq!(tag("hs_identity_constant_mode"), 1);
    assert_eq!(tag("subharmonicity_identity"), 1);
    assert_eq!(tag("lattice_separation"), 4);
    assert_eq!(r["config"]["seed"], 3);
    for table in ["hs_refinement.csv", "subharmonicity.csv", "sampling_frames.csv"] {
        assert!(out.join(table).exists(), "{table}");
    }
}

#[test]
fn seeds_change_outputs_and_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, tag: &str| {
        let out = dir.path().join(tag);
        let status = lab(&[
            "verify-theorems",
            "--dim",
            "3",
            "--trials",
            "10",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(status.status.code(), Some(0));
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("wall_time_seconds");
        r["config"].as_object_mut().unwrap().remove("output_dir");
        r
    };
    let a = run("5", "a");
    assert_eq!(a, run("5", "b"));
    assert_ne!(a["records"], run("6", "c")["records"]);
}

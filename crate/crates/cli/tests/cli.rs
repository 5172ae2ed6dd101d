use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ksgof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksgof")).args(args).env_remove("KSGOF_WORKERS").output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn suite_writes_report_with_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = ksgof(&["suite", "--id", "exact-values", "--seed", "42", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = read_json(&out);
    assert_eq!(doc["config"]["options"]["seed"], 42);
    assert_eq!(doc["report"]["passed"], true);
    assert!(stderr(&o).contains("config:"));
}

#[test]
fn failed_suite_exits_3() {
    let o = ksgof(&["suite", "--id", "massey-endpoint", "--reps", "200"]);
    assert_eq!(o.status.code(), Some(3));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["report"]["passed"], false);
}

#[test]
fn validation_errors_exit_2_and_name_the_key() {
    let cases: &[(&[&str], &str)] = &[
        (&["suite", "--id", "no-such-suite"], "--id"),
        (&["suite", "--id", "null-calibration", "--reps", "5"], "--reps"),
        (&["power", "--family", "null", "--n", "100", "--alpha", "1.5"], "--alpha"),
        (&["power", "--family", "null", "--n", "200,100"], "--n"),
        (&["power", "--family", "interior-bump", "--width", "0.2", "--n", "100"], "--a"),
        (&["power", "--family", "null", "--n", "100", "--frobnicate", "1"], "--frobnicate"),
        (&["classify", "--model", "/nonexistent/model.json", "--n", "256", "--r", "0.25"], "--model"),
        (&["classify", "--model", "m.json", "--n", "256", "--r", "0.7"], "--r"),
        (&["gaussian", "--shift", "wobble:1"], "--shift"),
        (&["test", "--family", "null", "--n", "10", "--e1", "0.6", "--e2", "0.5"], "--e2"),
    ];
    for (args, key) in cases {
        let o = ksgof(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(key), "{args:?} should name {key}: {}", stderr(&o));
    }
}

#[test]
fn invalid_bump_is_a_validation_error() {
    // 2a/(width sqrt(n)) = 1.34 at n = 500.
    let o = ksgof(&[
        "power", "--family", "interior-bump", "--a", "3", "--center", "0.5", "--width", "0.2", "--n", "500,2500,10000",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("--family") && err.contains("n = 500"), "{err}");
}

#[test]
fn power_csv_embeds_config() {
    let o = ksgof(&[
        "power", "--family", "interior-bump", "--a", "3", "--center", "0.5", "--width", "0.4", "--n", "500,2500",
        "--alpha", "0.05", "--reps", "400",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let config: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(config["experiment"]["master_seed"], 42);
    assert_eq!(config["experiment"]["n_grid"], serde_json::json!([500, 2500]));
    assert_eq!(lines.next(), Some("family,n,alpha,achieved_size,power,stderr,critical"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    let power: f64 = rows[1].rsplit(',').nth(2).unwrap().parse().unwrap();
    assert!(power > 0.9);
}

#[test]
fn results_do_not_depend_on_workers() {
    let args = ["power", "--family", "endpoint-bump", "--a", "1", "--width", "n^-0.25", "--n", "100,1000", "--reps", "300"];
    let body = |o: Output| String::from_utf8(o.stdout).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
    let one = ksgof(&[&args[..], &["--workers", "1"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_ksgof")).args(args).env("KSGOF_WORKERS", "3").output().unwrap();
    assert!(one.status.success() && env.status.success());
    assert!(stderr(&env).contains("\"workers\":3"));
    assert_eq!(body(one), body(env));
}

#[test]
fn simulate_then_classify() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.csv");
    let model = dir.path().join("model.json");
    let o = ksgof(&[
        "simulate", "--family", "single-coefficient", "--r", "0.25", "--amplitude", "2", "--n", "256", "--seed", "7",
        "--out", sample.to_str().unwrap(), "--model-out", model.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&sample).unwrap();
    assert!(csv.starts_with("# config: "));
    assert_eq!(csv.lines().count(), 2 + 256);
    assert_eq!(read_json(&model)["config"]["seed"], 7);

    let o = ksgof(&["classify", "--model", model.to_str().unwrap(), "--n", "256", "--r", "0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["verdict"]["kind"], "consistent");
    assert_eq!(doc["verdict"]["witness"]["j"], 2);
    assert_eq!(doc["config"]["n"], 256);
}

#[test]
fn classify_reads_raw_coefficients() {
    // Amplitude 6 at n = 256 is not a density, but its coefficient field can still be classified.
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(&model, r#"{"family":"wavelet","coefficients":[{"j":2,"i":2,"theta":"0.75"}]}"#).unwrap();
    let o = ksgof(&["classify", "--model", model.to_str().unwrap(), "--n", "256", "--r", "0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["verdict"]["kind"], "consistent");
}

#[test]
fn test_subcommand_on_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    std::fs::write(&data, "# one uniform point\n0.5\n").unwrap();
    let o = ksgof(&["test", "--data", data.to_str().unwrap(), "--alpha", "0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    // n = 1: T = 1/2 at x = 1/2, and the level-0.1 critical value is 0.95.
    assert_eq!(doc["result"]["decision"]["statistic"], 0.5);
    assert!((doc["result"]["decision"]["critical"].as_f64().unwrap() - 0.95).abs() < 1e-9);
    assert_eq!(doc["result"]["decision"]["reject"], false);
}

#[test]
fn failed_run_leaves_existing_output_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    std::fs::write(&out, "previous\n").unwrap();
    let o = ksgof(&["power", "--family", "null", "--n", "100", "--reps", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "previous\n");
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn gaussian_zero_shift_has_no_gap() {
    let o = ksgof(&["gaussian", "--mode", "gap", "--shift", "zero", "--reps", "500", "--grid", "256"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["gap"]["gap"], 0.0);
    assert_eq!(doc["config"]["paths"]["seed"], 42);
}

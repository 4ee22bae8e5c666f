//! End-to-end tests of the command-line interface: file round trips,
//! closed-form norm values, cross-path agreement, exit-code contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_besovbilin"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn besovbilin")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&output.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad JSON '{text}': {e}"))
}

fn small_grid_args() -> Vec<String> {
    vec![
        "--samples-per-axis".into(),
        "4096".into(),
        "--period-scale".into(),
        "16".into(),
    ]
}

fn make_function(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let mut args: Vec<String> = vec![
        "make-function".into(),
        "--out".into(),
        out.to_string_lossy().into(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    args.extend(small_grid_args());
    let output = bin().args(&args).output().expect("spawn");
    assert!(
        output.status.success(),
        "make-function failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    out.to_string_lossy().into_owned()
}

#[test]
fn besov_norm_of_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let field = make_function(dir.path(), "zero.json", &["--kind", "zero"]);
    let output = run(&["besov-norm", "--field", &field, "--s", "0.5", "--p", "2", "--q", "2"]);
    assert!(output.status.success());
    let json = stdout_json(&output);
    assert_eq!(json["norm"], 0.0);
    assert!(json["per_band"].as_array().unwrap().len() > 1);
}

#[test]
fn besov_norm_of_spike_matches_closed_form() {
    // spike at ξ = 2^6 on the desk grid: norm = 2^{ℓs}·(Δξ/2π)·(2πP)^{1/p}
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("spike.json");
    let output = run(&[
        "make-function",
        "--kind",
        "spike",
        "--xi",
        "64",
        "--spectral",
        "--grid-preset",
        "desk",
        "--out",
        field.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let output = run(&[
        "besov-norm",
        "--field",
        field.to_str().unwrap(),
        "--s",
        "1",
        "--p",
        "2",
        "--q",
        "2",
    ]);
    assert!(output.status.success());
    let json = stdout_json(&output);
    let norm = json["norm"].as_f64().unwrap();
    let expected = 6.3830764864229224e0;
    assert!(
        (norm - expected).abs() <= 1e-9 * expected,
        "norm {norm} vs {expected}"
    );
}

#[test]
fn sobolev_norm_runs() {
    let dir = tempfile::tempdir().unwrap();
    let field = make_function(dir.path(), "bump.json", &["--kind", "low-bump"]);
    let output = run(&["sobolev-norm", "--field", &field, "--s", "0", "--p", "2"]);
    assert!(output.status.success());
    let norm = stdout_json(&output)["norm"].as_f64().unwrap();
    assert!(norm > 0.0);
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{this is not json").unwrap();
    let output = run(&[
        "besov-norm",
        "--field",
        path.to_str().unwrap(),
        "--s",
        "0",
        "--p",
        "2",
        "--q",
        "2",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn numeric_overflow_exits_3() {
    // the Bessel weight (1+|ξ|²)^{s/2} overflows to inf for huge s, which
    // must surface as a numeric failure, not a config error
    let dir = tempfile::tempdir().unwrap();
    let field = make_function(dir.path(), "bump.json", &["--kind", "low-bump"]);
    let output = run(&["sobolev-norm", "--field", &field, "--s", "100000", "--p", "2"]);
    assert_eq!(
        output.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn apply_op_constant_symbol_compares_all_paths() {
    // N = 64 so the brute-force oracle joins the comparison
    let dir = tempfile::tempdir().unwrap();
    let tiny = ["--samples-per-axis", "64", "--period-scale", "2"];
    let mk = |name: &str, seed: &str| -> String {
        let out = dir.path().join(name);
        let output = bin()
            .args(["make-function", "--kind", "random", "--band-hi", "12", "--seed", seed])
            .args(["--out", out.to_str().unwrap()])
            .args(tiny)
            .output()
            .unwrap();
        assert!(output.status.success());
        out.to_string_lossy().into_owned()
    };
    let f1 = mk("f1.json", "1");
    let f2 = mk("f2.json", "2");
    let symbol = dir.path().join("one.json");
    let output = bin()
        .args(["make-symbol", "--descriptor", r#"{"family":"constant","value":1.0}"#])
        .args(["--out", symbol.to_str().unwrap()])
        .args(tiny)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let out_field = dir.path().join("tf.json");
    let output = run(&[
        "apply-op",
        "--symbol",
        symbol.to_str().unwrap(),
        "--f1",
        &f1,
        "--f2",
        &f2,
        "--out",
        out_field.to_str().unwrap(),
        "--compare-paths",
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let json = stdout_json(&output);
    let deviation = json["max_relative_deviation"].as_f64().unwrap();
    assert!(deviation <= 1e-10, "cross-path deviation {deviation}");
    assert!(json["paths_compared"].as_array().unwrap().len() >= 3);
    assert!(out_field.exists());
}

#[test]
fn apply_op_grid_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = make_function(dir.path(), "f1.json", &["--kind", "zero"]);
    // different grid for f2
    let f2 = dir.path().join("f2.json");
    let output = bin()
        .args(["make-function", "--kind", "zero"])
        .args(["--out", f2.to_str().unwrap()])
        .args(["--samples-per-axis", "1024", "--period-scale", "16"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let symbol = dir.path().join("one.json");
    let output = bin()
        .args(["make-symbol", "--descriptor", r#"{"family":"constant","value":1.0}"#])
        .args(["--out", symbol.to_str().unwrap()])
        .args(small_grid_args())
        .output()
        .unwrap();
    assert!(output.status.success());
    let output = run(&[
        "apply-op",
        "--symbol",
        symbol.to_str().unwrap(),
        "--f1",
        &f1,
        "--f2",
        f2.to_str().unwrap(),
        "--out",
        dir.path().join("out.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn make_symbol_rejects_nyquist_violation() {
    let dir = tempfile::tempdir().unwrap();
    let symbol = dir.path().join("sym.json");
    let output = bin()
        .args([
            "make-symbol",
            "--descriptor",
            r#"{"family":"def-symbol","k_min":5,"k_max":9}"#,
        ])
        .args(["--out", symbol.to_str().unwrap()])
        .args(small_grid_args()) // Nyquist 128 → k_max ≤ 6
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn experiment_closed_form_suite_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("r1");
    let out2 = dir.path().join("r2");
    for out in [&out1, &out2] {
        let output = bin()
            .args(["experiment", "--suite", "closed-form", "--seed", "5"])
            .args(["--out-dir", out.to_str().unwrap(), "--plot-data"])
            .args(small_grid_args())
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "experiment failed: {}\n{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
    }
    let csv1 = fs::read(out1.join("reports.csv")).unwrap();
    let csv2 = fs::read(out2.join("reports.csv")).unwrap();
    assert_eq!(csv1, csv2, "CSV bytes must be identical across reruns");
    assert!(out1.join("reports.json").exists());
    // plot-data files exist and have two columns
    let plot_files: Vec<_> = fs::read_dir(&out1)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "dat"))
        .collect();
    assert!(!plot_files.is_empty());
    let body = fs::read_to_string(plot_files[0].path()).unwrap();
    assert!(body.lines().all(|l| l.split_whitespace().count() == 2));
}

#[test]
fn experiment_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"grid":{"dimension":1,"samples_per_axis":4096,"period_scale":16.0},"seed":3,"suites":["closed-form"]}"#,
    )
    .unwrap();
    let out = dir.path().join("reports");
    let output = run(&[
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert!(out.join("reports.csv").exists());
}

#[test]
fn experiment_empty_suite_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["experiment", "--out-dir", dir.path().join("r").to_str().unwrap()])
        .args(small_grid_args())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn experiment_unknown_suite_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["experiment", "--suite", "everything"])
        .args(["--out-dir", dir.path().join("r").to_str().unwrap()])
        .args(small_grid_args())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

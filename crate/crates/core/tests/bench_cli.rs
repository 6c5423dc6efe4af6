use std::path::Path;
use std::process::{Command, Output};

use resample_lab::bench::sha256_hex;

const BIN: &str = env!("CARGO_BIN_EXE_resample-bench");

fn write_config(dir: &Path, name: &str, json: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn bench(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("RESAMPLE_BENCH_OUT").output().unwrap()
}

fn rows(csv_text: &str) -> Vec<Vec<String>> {
    csv_text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

const COUNTEREXAMPLE: &str = r#"{
    "seed": 99,
    "schemes": ["systematic", "multinomial"],
    "replicates": 50000,
    "system": {"kind": "explicit", "weights": [0.5, 0.5, 0.5, 2.5]}
}"#;

#[test]
fn diagnose_reports_the_systematic_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", COUNTEREXAMPLE);
    let out = dir.path().join("out");
    let o = bench(&["diagnose", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(text.starts_with("experiment,scheme,n,t,kind,replicate,metric,value,se,seed\n"));
    assert!(!text.contains('\r'));
    let table = rows(&text);
    let find = |scheme: &str, metric: &str| -> (f64, f64) {
        let r = table.iter().find(|r| r[1] == scheme && r[6] == metric).unwrap();
        (r[7].parse().unwrap(), r[8].parse().unwrap_or(0.0))
    };
    let (cov, se) = find("systematic", "cov_1_3");
    assert!((cov - 0.25).abs() <= 4.0 * se + 1e-3, "cov_1_3 = {cov}");
    assert_eq!(find("systematic", "floor_support_violations").0, 0.0);
    let (mcov, mse) = find("multinomial", "cov_1_3");
    assert!((mcov - (-4.0 * 0.125 * 0.125)).abs() <= 4.0 * mse);
    assert!(table.iter().all(|r| r[9] == "99"));
    // 17 significant digits
    let v = &table.iter().find(|r| r[6] == "cov_1_3").unwrap()[7];
    assert_eq!(v.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config_sha256"], sha256_hex(COUNTEREXAMPLE.as_bytes()));
    assert_eq!(meta["seed"], 99);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            r#"{"seed": 1, "schemes": ["ssp"], "replicates": 1, "system": {"kind": "explicit", "weights": [1, 2]}}"#,
            "replicates",
        ),
        (
            r#"{"seed": 1, "schemes": ["ssp"], "replicates": 10, "colour": "red", "system": {"kind": "explicit", "weights": [1]}}"#,
            "colour",
        ),
        (r#"{"schemes": ["ssp"], "replicates": 10, "system": {"kind": "explicit", "weights": [1]}}"#, "seed"),
        (
            r#"{"seed": 1, "schemes": ["ssp", "bogus"], "replicates": 10, "system": {"kind": "explicit", "weights": [1]}}"#,
            "schemes[1]",
        ),
        (
            r#"{"seed": 1, "schemes": ["ssp"], "replicates": 10, "system": {"kind": "explicit", "weights": [1], "extra": 0}}"#,
            "system",
        ),
        (
            r#"{"experiment": "rate", "seed": 1, "schemes": ["ssp"], "replicates": 10, "system": {"kind": "explicit", "weights": [1]}}"#,
            "experiment",
        ),
    ];
    for (i, (json, field)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), json);
        let out = dir.path().join(format!("out{i}"));
        let o = bench(&["diagnose", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "case {i}: {err}");
        assert!(!out.join("results.csv").exists());
    }
}

#[test]
fn numerical_failures_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    // an observation so far out that every bootstrap weight underflows
    std::fs::write(dir.path().join("obs.csv"), "0.5\n1e200\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"id": "far-obs", "seed": 1, "schemes": ["multinomial"], "n_grid": [8], "replicates": 2,
            "model": {"dim": 1, "horizon": 2, "alpha": 0.4, "observations": "OBS"}}"#
            .replace("OBS", dir.path().join("obs.csv").to_str().unwrap())
            .as_str(),
    );
    let o = bench(&["pf-variance", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("far-obs") && err.contains("step 2"), "{err}");
}

fn run_twice(sub: &str, json: &str, extra: &[&str]) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", json);
    let mut outputs = Vec::new();
    for (k, jobs) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs];
        args.extend_from_slice(extra);
        let o = bench(&args);
        assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        let name = if extra.contains(&"json") { "results.json" } else { "results.csv" };
        outputs.push((std::fs::read(out.join(name)).unwrap(), std::fs::read(out.join("meta.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1], "{sub} output differs between reruns");
}

#[test]
fn reruns_are_byte_identical() {
    run_twice(
        "diagnose",
        r#"{"seed": 4, "schemes": ["ssp", "ordered-systematic"], "n_grid": [6, 12], "replicates": 500,
            "system": {"kind": "random", "count": 2, "dim": 2}}"#,
        &[],
    );
    run_twice(
        "rate",
        r#"{"seed": 4, "schemes": ["ordered-stratified"], "n_grid": [32, 64, 128, 256], "replicates": 100,
            "system": {"kind": "gaussian-likelihood", "dim": 2}, "test_functions": ["half-l1", "x"]}"#,
        &[],
    );
    run_twice(
        "pf-variance",
        r#"{"seed": 4, "schemes": ["stratified", "ordered-stratified"], "n_grid": [64], "replicates": 20,
            "model": {"dim": 2, "horizon": 5, "alpha": 0.4, "formalism": "guided"}, "test_functions": ["x"]}"#,
        &[],
    );
    run_twice(
        "pf-oracle",
        r#"{"seed": 4, "schemes": ["multinomial"], "n_grid": [64, 128], "replicates": 20,
            "model": {"dim": 2, "horizon": 5, "alpha": 0.4, "auxiliary": true}}"#,
        &["--format", "json"],
    );
}

#[test]
fn single_scheme_with_two_replicates_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"seed": 1, "schemes": ["ssp"], "n_grid": [32], "replicates": 2,
            "model": {"dim": 1, "horizon": 4, "alpha": 0.4}}"#,
    );
    let out = dir.path().join("o");
    let o = bench(&["pf-variance", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let table = rows(&std::fs::read_to_string(out.join("results.csv")).unwrap());
    let var_rows: Vec<_> = table.iter().filter(|r| r[6] == "var_log_likelihood").collect();
    assert_eq!(var_rows.len(), 5);
    assert!(table.iter().all(|r| r[6] != "var_ratio"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", COUNTEREXAMPLE.replace("50000", "100").as_str());
    let target = dir.path().join("from-env");
    let o = Command::new(BIN)
        .args(["diagnose", "--config", cfg.to_str().unwrap(), "--format", "json"])
        .env("RESAMPLE_BENCH_OUT", &target)
        .output()
        .unwrap();
    assert!(o.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(target.join("results.json")).unwrap()).unwrap();
    assert!(parsed.as_array().unwrap().iter().any(|r| r["metric"] == "cov_1_3"));
}

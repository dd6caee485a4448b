use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schouten"))
}

fn manifests() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../manifests")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn report_on_round_sphere() {
    let out = run(&["report", manifests().join("round_s3.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["total_sigma2"].as_f64().unwrap() - 14.804).abs() < 1e-3);
    assert!((v["yamabe_quotient"].as_f64().unwrap() - 43.82).abs() < 1e-2);
    for q in v["q_range"].as_array().unwrap() {
        assert!((q.as_f64().unwrap() - 1.875).abs() < 1e-9);
    }
    assert_eq!(v["pinching"]["hypothesis_met"], true);
}

#[test]
fn report_on_flat_torus_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&["report", manifests().join("flat_torus.json").to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    for key in ["scalar_range", "ricci_eigenvalue_range", "q_range"] {
        assert!(v[key].as_array().unwrap().iter().all(|x| x.as_f64() == Some(0.0)), "{key}");
    }
    assert_eq!(v["total_sigma2"], 0.0);
    assert_eq!(v["pinching"]["hypothesis_met"], false);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let both = write(
        &dir,
        "both.json",
        r#"{"chart": {"kind": "torus3", "dims": [8, 8, 8]},
            "metric": {"catalog": {"name": "flat_torus"}, "components": {"g11": "1"}}}"#,
    );
    let out = run(&["report", &both]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not both"));

    let typo = write(
        &dir,
        "typo.json",
        "{\"chart\": {\"kind\": \"torus3\", \"dims\": [8, 8, 8]},\n \"metric\": {\"catalog\": {\"name\": \"flat_torus\"}},\n \"solver\": {\"t_zero\": 0.5}}",
    );
    let out = run(&["report", &typo]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("solver") && err.contains("line 3"), "{err}");

    let bad_expr = write(
        &dir,
        "expr.json",
        r#"{"chart": {"kind": "torus3", "dims": [8, 8, 8]}, "metric": {"components": {"g11": "1 + sin("}}}"#,
    );
    let out = run(&["report", &bad_expr]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("metric.components.g11"));

    let t0 = write(
        &dir,
        "t0.json",
        r#"{"chart": {"kind": "s3_band", "dims": [16, 1, 1]}, "metric": {"catalog": {"name": "round_s3"}}, "solver": {"t0": "3/4"}}"#,
    );
    assert_eq!(run(&["solve", &t0]).status.code(), Some(2));
}

#[test]
fn solve_round_sphere_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run(&["solve", manifests().join("round_s3.json").to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["pinching_ok"], true);
    assert_eq!(v["ricci_positive"], true);
    let u = v["final_state"]["diagnostics"]["sup_u"].as_f64().unwrap();
    assert!((u - 0.5 * 0.4f64.ln()).abs() < 1e-8);
    let mut rdr = csv::Reader::from_path(&trace).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["t", "residual_sup", "cone_margin_min", "sup_u", "inf_u", "sup_grad_u", "harnack_gap"]);
    assert_eq!(rdr.records().count(), v["path"].as_array().unwrap().len());
}

#[test]
fn solve_overrides_t0_and_steps() {
    let out = run(&["solve", manifests().join("round_s3.json").to_str().unwrap(), "--t0", "1/2", "--steps", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["t0"], 0.5);
    assert_eq!(v["steps"], 8);
}

#[test]
fn solve_berger_reaches_positive_ricci() {
    let out = run(&["solve", manifests().join("berger_s3.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["ricci_positive"], true);
}

#[test]
fn flat_torus_solve_is_rejected() {
    let out = run(&["solve", manifests().join("flat_torus.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("R_g > 0 required"));
}

#[test]
fn verify_all_on_flat_torus_passes() {
    let out = run(&["verify", manifests().join("flat_torus_verify.json").to_str().unwrap(), "--suite", "all"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["failed"], 0);
}

#[test]
fn verify_lemma51_with_constant_factor_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        &dir,
        "c.json",
        r#"{"chart": {"kind": "s3_band", "dims": [32, 1, 1]}, "metric": {"catalog": {"name": "berger_s3", "fiber_scale": 0.7}},
            "conformal_factor": "0.4", "suites": ["lemma51"]}"#,
    );
    let out = run(&["verify", &m]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["reports"][0]["abs_gap"].as_f64().unwrap() <= 1e-14);
}

#[test]
fn unknown_suite_exits_with_two() {
    let out = run(&["verify", manifests().join("round_s3.json").to_str().unwrap(), "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fault_injection_is_localized() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        &dir,
        "fi.json",
        r#"{"chart": {"kind": "s3_band", "dims": [64, 1, 1]}, "metric": {"catalog": {"name": "round_s3"}},
            "suites": ["transformation_laws"], "fault_injection": true, "seed": 1}"#,
    );
    let out = run(&["verify", &m]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    let failed: Vec<_> = v["reports"].as_array().unwrap().iter().filter(|r| r["pass"] == false).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|r| r["name"].as_str().unwrap().starts_with("schouten_law") && r["node"].is_u64()));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let m = manifests().join("round_s3.json");
    let run_with = |threads: &str, seed: &str| {
        bin()
            .env("SCHOUTEN_THREADS", threads)
            .args(["verify", m.to_str().unwrap(), "--seed", seed])
            .output()
            .unwrap()
            .stdout
    };
    let a = run_with("1", "7");
    assert_eq!(a, run_with("4", "7"));
    assert_ne!(a, run_with("1", "8"));
    assert_eq!(bin().env("SCHOUTEN_THREADS", "many").args(["verify", m.to_str().unwrap()]).output().unwrap().status.code(), Some(2));
}

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn talbot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_talbot")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn close(v: &Value, x: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - x).abs() <= tol
}

#[test]
fn gamma_matches_closed_form() {
    let v = json(&talbot(&["gauss", "--gamma", "1", "3", "0"]));
    assert_eq!(v["q"], 3);
    assert!(close(&v["modulus"], 3f64.sqrt(), 1e-12));
    assert!(close(&v["value_re"], v["via_cases_re"].as_f64().unwrap(), 1e-12));
    assert!(close(&v["value_im"], v["via_cases_im"].as_f64().unwrap(), 1e-12));
}

#[test]
fn plain_sum_with_negative_arguments() {
    let v = json(&talbot(&["gauss", "--sum", "-1", "2", "5"]));
    assert_eq!(v["a"], -1);
    assert!(close(&v["modulus"], 5f64.sqrt(), 1e-12));
}

#[test]
fn revival_at_one_half() {
    let v = json(&talbot(&["revival", "--p", "1", "--q", "2"]));
    assert!(close(&v["shift"], 0.5, 0.0));
    for w in v["weights"].as_array().unwrap() {
        assert!(close(&w["modulus"], 0.5f64.sqrt(), 1e-15));
    }
    assert!(close(&v["mass_re"], 1.0, 1e-15));
}

#[test]
fn revival_check_is_reported() {
    let v = json(&talbot(&["revival", "--p", "2", "--q", "5", "--sigma", "0.01"]));
    let check = &v["check"];
    assert_eq!(check["n_max"], 1000);
    assert!(check["max_abs_diff"].as_f64().unwrap() < 1e-8);
    assert!(check["worst_peak_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn horizontal_pairing_at_rational_time() {
    let a = json(&talbot(&["pair", "--line", "horizontal", "--zeta", "1/3"]));
    let b = json(&talbot(&["pair", "--line", "horizontal", "--zeta", "0.3333333333333333"]));
    assert_eq!(a["value_re"], b["value_re"]);
    assert!(a["tail_bound"].as_f64().unwrap() <= 1e-16);
    assert_eq!(a["field"], "v");
}

#[test]
fn helmholtz_vertical_has_no_tail_bound() {
    let v = json(&talbot(&[
        "pair", "--field", "w", "--r", "20.5", "--line", "vertical", "--xi", "0.25", "--n-max", "2000",
    ]));
    assert_eq!(v["tail_bound"], Value::Null);
    assert!(close(&v["r"], 20.5, 0.0));
    let out = talbot(&["pair", "--field", "w", "--r", "20.5", "--line", "vertical", "--xi", "0.25", "--tol", "1e-3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_exits_two() {
    let out = talbot(&["pair", "--line", "vertical", "--xi", "0", "--n-max", "100", "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not achievable"));
}

#[test]
fn invalid_input_exits_one() {
    for args in [
        &["gauss", "--gamma", "2", "4", "1"][..],
        &["gauss"],
        &["revival", "--p", "1", "--q", "0"],
        &["pair", "--field", "w", "--line", "horizontal", "--zeta", "0.1"],
        &["pair", "--line", "sideways"],
        &["carpet", "--field", "x"],
        &["frobnicate"],
    ] {
        let out = talbot(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(talbot(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_count_from_environment() {
    let bad = Command::new(env!("CARGO_BIN_EXE_talbot"))
        .args(["gauss", "--gamma", "1", "3", "0"])
        .env("TALBOT_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

fn sweep_csv(dir: &Path, threads: &str, name: &str) -> String {
    let path = dir.join(name);
    let out = Command::new(env!("CARGO_BIN_EXE_talbot"))
        .args(["sweep", "--line", "horizontal", "--zeta", "0.3", "--r-grid", "10.5,20.5,40.5", "--s", "1"])
        .args(["--fit", "err_pair", "-o"])
        .arg(&path)
        .env("TALBOT_THREADS", threads)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fit err_pair"));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let one = sweep_csv(dir.path(), "1", "a.csv");
    let four = sweep_csv(dir.path(), "4", "b.csv");
    assert_eq!(one, four);
    let mut lines = one.lines();
    assert_eq!(lines.next(), Some("r,mu,err_pair,err_low,err_mid,err_high,err_tail_v,err_hs"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 8 && !r[7].is_empty()));
}

#[test]
fn integer_radius_warns_but_runs() {
    let out = talbot(&["sweep", "--line", "horizontal", "--zeta", "0.3", "--r-grid", "10,11,12"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("integer"));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("r,mu,"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"subcommand": "gauss", "gamma": [1, 5, 2]}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&talbot(&["gauss", "--gamma", "1", "3", "0", "--config", cfg]));
    assert_eq!((v["q"].as_i64(), v["m"].as_i64()), (Some(5), Some(2)));
    assert_eq!(talbot(&["revival", "--config", cfg]).status.code(), Some(1));

    let pair = dir.path().join("pair.json");
    std::fs::write(
        &pair,
        r#"{"line": {"kind": "horizontal", "zeta": 0.5},
            "phi": {"type": "trigpoly", "coeffs": [[0, 1.0, 0.0], [1, 0.5, 0.0]]}}"#,
    )
    .unwrap();
    let v = json(&talbot(&["pair", "--config", pair.to_str().unwrap()]));
    // Σ c_n(1/2) φ̂_{−n} = 1 + ½·e^{−iπ/2}
    assert!(close(&v["value_re"], 1.0, 1e-15));
    assert!(close(&v["value_im"], -0.5, 1e-15));
    assert_eq!(v["tail_bound"].as_f64(), Some(0.0));
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{not json").unwrap();
    assert_eq!(talbot(&["gauss", "--config", broken.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn carpet_writes_pgm_and_row() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("c.pgm");
    let row = dir.path().join("row.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_talbot"))
        .args([
            "carpet",
            "--width",
            "64",
            "--height",
            "32",
            "--n-max",
            "100",
            "--sigma",
            "0.02",
            "--row",
            "8",
            "--row-csv",
        ])
        .arg(&row)
        .arg("-o")
        .arg(&pgm)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(&pgm).unwrap();
    let header = b"P5\n64 32\n65535\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 64 * 32 * 2);
    let csv = std::fs::read_to_string(&row).unwrap();
    assert_eq!(csv.lines().next(), Some("xi,intensity"));
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn carpet_defaults_to_working_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_talbot"))
        .args(["carpet", "--field", "w", "--r", "30.5", "--width", "16", "--height", "8", "--n-max", "20"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("carpet.pgm").exists());
}

use std::fs;
use std::process::{Command, Output};

fn optosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optosim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn sweep_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = optosim(&["sweep", "--shots", "1000", "--seed", "7", "--out-dir", out, "--export-qasm"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epsilon,fidelity,fidelity_err,tr_zz,tr_xy,tr_yx,tr_iz,tr_zi,concurrence_theory,\
         retained_fraction_zz,single_qubit_gates,cnot_gates,shots,seed"
    );
    assert_eq!(lines.count(), 13);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["provenance"]["seed"], 7);
    assert_eq!(report["rows"].as_array().unwrap().len(), 13);
    assert_eq!(fs::read_dir(dir.path().join("circuits")).unwrap().count(), 13);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"epsilon_values": [0.001, 0.01], "noise_preset": "none", "analytic": true, "shots": 10}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = optosim(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--epsilon",
        "0.005",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let f: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((f - 1.0).abs() < 1e-9, "noiseless analytic fidelity {f}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"shots": 100, "colour": "red"}"#).unwrap();

    for args in [
        vec!["sweep", "--config", bad.to_str().unwrap()],
        vec!["sweep", "--shots", "0"],
        vec!["sweep", "--noise-preset", "lagos"],
        vec!["sweep", "--epsilon", "1.5"],
        vec!["sweep", "--analytic", "--noise-preset", "belem-like"],
        vec!["tomography", "--epsilon", "0.1,0.2"],
        vec!["sweep", "--no-such-flag"],
    ] {
        let o = optosim(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.qasm");
    let o = optosim(&["transpile", "--input", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 3);

    let garbage = dir.path().join("garbage.qasm");
    fs::write(&garbage, "OPENQASM 2.0;\nqreg q[4];\nfoo q[0];\n").unwrap();
    let o = optosim(&["transpile", "--input", garbage.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn circuit_export_round_trips_through_transpile() {
    let dir = tempfile::tempdir().unwrap();
    let qasm = dir.path().join("evo.qasm");
    let o = optosim(&["circuit", "--epsilon", "0.01", "--output", qasm.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&qasm).unwrap();
    assert!(text.starts_with("OPENQASM 2.0;"));
    assert_eq!(text.matches("cx ").count(), 24);

    let o = optosim(&["transpile", "--input", qasm.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["after"]["cnot"], 24);
    assert_eq!(summary["swaps"], 0);
    assert!(summary["after"]["single_qubit"].as_u64().unwrap() <= 32);
    assert!(String::from_utf8(o.stdout).unwrap().contains("qreg q[5];"));
}

#[test]
fn calibrate_prints_stochastic_matrix() {
    let o = optosim(&["calibrate", "--shots", "2000", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["column_stochastic"], true);
    assert_eq!(v["matrix"].as_array().unwrap().len(), 16);

    let o = optosim(&["calibrate", "--analytic", "--noise-preset", "none"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["matrix"][5][5], 1.0);
}

#[test]
fn tomography_is_seed_deterministic() {
    let args = ["tomography", "--epsilon", "0.01", "--shots", "3000", "--seed", "11"];
    let a = optosim(&args);
    let b = optosim(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["row"]["cnot_gates"], 24);
}

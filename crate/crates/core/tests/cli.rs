use std::process::{Command, Output};

fn kbasis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbasis"))
        .args(args)
        .env_remove("KBASIS_THREADS")
        .env_remove("KBASIS_MEM_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let args = ["simulate", "--n", "1000", "--k", "2", "--alpha", "0.5", "--p", "0.1", "--trials", "100", "--seed", "7"];
    let a = kbasis(&args);
    let b = kbasis(&args);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 2);
    assert!(stdout(&a).starts_with("n,k,alpha,a_n,p,mode,trials,basis_prob_hat,ci_lo,ci_hi,exact_lambda,asympt_lambda,limit_prob,tv_hat,seed"));
}

#[test]
fn worker_count_does_not_change_output() {
    let args = ["simulate", "--n", "800", "--p", "0.12", "--trials", "300", "--seed", "3", "--format", "json"];
    let one = Command::new(env!("CARGO_BIN_EXE_kbasis")).args(args).env("KBASIS_THREADS", "1").output().unwrap();
    let three = Command::new(env!("CARGO_BIN_EXE_kbasis")).args(args).env("KBASIS_THREADS", "3").output().unwrap();
    assert_eq!(stdout(&one), stdout(&three));
}

#[test]
fn counts_prints_qbinomial_coefficients() {
    let out = stdout(&kbasis(&["counts", "--n", "2", "--k", "2"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,k,j,count");
    let counts: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(counts, ["1", "1", "2", "1", "1"]);
}

#[test]
fn exact_reports_mean() {
    let out = stdout(&kbasis(&["exact", "--n", "4", "--k", "2", "--alpha", "0.5", "--p", "0.3", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let lambda = v[0]["exact_lambda"].as_f64().unwrap();
    assert!((lambda - 3.5099).abs() < 1e-4, "{lambda}");
}

#[test]
fn couple_and_diagnose_run() {
    let out = stdout(&kbasis(&["couple", "--n", "4", "--p", "0.5", "--j", "4", "--samples", "20000", "--seed", "1"]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let tv: f64 = row[4].parse().unwrap();
    assert!(tv < 0.05, "{tv}");
    assert_eq!(row[5], "0");
    let out = stdout(&kbasis(&["diagnose", "--n", "1000", "--delta", "1"]));
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn sweep_logs_rows_and_records_errors() {
    let out = kbasis(&["sweep", "--n", "500", "--a-n", "-1e6,0", "--trials", "50", "--seed", "2"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("below expressible threshold"), "{}", lines[1]);
    let log = String::from_utf8(out.stderr).unwrap();
    assert_eq!(log.lines().count(), 2);
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counts.json");
    let out = kbasis(&["counts", "--n", "3", "--k", "1", "--format", "json", "--output", path.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    let bad = kbasis(&["simulate", "--n", "10", "--k", "1", "--p", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
    let rec: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(rec["error"], "validation");

    let cap = Command::new(env!("CARGO_BIN_EXE_kbasis"))
        .args(["simulate", "--n", "100000", "--k", "3", "--p", "0.01", "--trials", "1"])
        .env("KBASIS_MEM_CAP", "1000")
        .output()
        .unwrap();
    assert_eq!(cap.status.code(), Some(3));

    let io = kbasis(&["counts", "--n", "2", "--k", "2", "--output", "/nonexistent-dir/x.csv"]);
    assert_eq!(io.status.code(), Some(4));
    let rec: serde_json::Value = serde_json::from_slice(&io.stderr).unwrap();
    assert_eq!(rec["error"], "io");

    let usage = kbasis(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(2));
}

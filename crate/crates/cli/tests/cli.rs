use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cesaro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cesaro"))
        .args(args)
        .env_remove("CESARO_DEFAULT_HORIZON")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn eval_prints_count_fraction_and_decimal() {
    let o = cesaro(&["eval", "residue 2 {0}", "--N", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "5/10 1/2 0.5\n");
    let o = cesaro(&["eval", "union(residue 3 {0}, residue 5 {0})", "--N", "15"]);
    assert_eq!(stdout(&o), "7/15 7/15 0.466666666667\n");
}

#[test]
fn eval_reads_a_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e.txt", "blocks geometric 2\n");
    let o = cesaro(&["eval", "--file", &f, "--N", "3"]);
    assert_eq!(stdout(&o), "2/3 2/3 0.666666666667\n");
}

#[test]
fn parse_errors_exit_2() {
    let o = cesaro(&["eval", "residue 2 {5}", "--N", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(cesaro(&["limits", "nonsense"]).status.code(), Some(2));
}

#[test]
fn limits_of_geometric_blocks() {
    let v = json(&cesaro(&["limits", "blocks geometric 2"]));
    assert_eq!(v["upper"]["exact"], "2/3");
    assert_eq!(v["lower"]["exact"], "1/3");
    assert_eq!(v["verdict"], "NotInF");
    let v = json(&cesaro(&["limits", "residue 5 {0}"]));
    assert_eq!(v["limit"]["exact"], "1/5");
}

#[test]
fn limits_streams_when_asked() {
    let v = json(&cesaro(&["limits", "blocks geometric 2", "--stream", "--horizon", "4194304", "--window", "0.9"]));
    assert_eq!(v["method"], "Streamed");
    assert_eq!(v["verdict"], "NotInF");
    let upper: f64 = v["upper"]["decimal"].as_str().unwrap().parse().unwrap();
    assert!((upper - 2.0 / 3.0).abs() < 5e-3, "{upper}");
}

#[test]
fn undecided_limits_exit_3() {
    let o = cesaro(&["limits", "predicate primes", "--horizon", "1000", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "Unknown");
}

#[test]
fn env_horizon_is_used() {
    let o = Command::new(env!("CARGO_BIN_EXE_cesaro"))
        .args(["trace", "residue 2 {0}"])
        .env("CESARO_DEFAULT_HORIZON", "1000")
        .output()
        .unwrap();
    let text = stdout(&o);
    assert!(text.starts_with("N,nu_N\n1,0\n"));
    assert!(text.ends_with("1000,0.5\n"), "{text}");
}

#[test]
fn trace_is_deterministic_csv() {
    let a = cesaro(&["trace", "greedy 1/3", "--horizon", "5000"]);
    let b = cesaro(&["trace", "greedy 1/3", "--horizon", "5000"]);
    assert_eq!(a.stdout, b.stdout);
    for line in stdout(&a).lines().skip(1) {
        let (n, v) = line.split_once(',').unwrap();
        n.parse::<u64>().unwrap();
        v.parse::<f64>().unwrap();
    }
}

#[test]
fn nullmod_on_odds_removes_one() {
    let dir = TempDir::new().unwrap();
    let audit = dir.path().join("audit.csv");
    let v = json(&cesaro(&["nullmod", "residue 2 {1}", "--bound", "1/2", "--horizon", "100", "--audit", audit.to_str().unwrap()]));
    assert_eq!(v["removed"], serde_json::json!([1]));
    assert_eq!(v["approximate"], false);
    let csv = fs::read_to_string(&audit).unwrap();
    assert_eq!(csv.lines().count(), 101);
    assert!(csv.lines().nth(1).unwrap().starts_with("1,"));
}

#[test]
fn nullmod_bound_mismatch_exits_4() {
    let o = cesaro(&["nullmod", "residue 2 {1}", "--bound", "1/3", "--horizon", "100"]);
    assert_eq!(o.status.code(), Some(4));
}

fn chain_file(dir: &TempDir, lines: &[&str]) -> String {
    write(dir, "chain.txt", &(lines.join("\n") + "\n"))
}

#[test]
fn chain_verify_and_certify() {
    let dir = TempDir::new().unwrap();
    let f = chain_file(&dir, &["residue 8 {0}", "residue 2 {0}", "residue 4 {0}"]);
    let v = json(&cesaro(&["chain", "verify", &f, "--horizon", "1000"]));
    assert_eq!(v["elements"], serde_json::json!(["residue 8 {0}", "residue 4 {0}", "residue 2 {0}"]));
    let v = json(&cesaro(&["chain", "certify", &f, "--epsilon", "0.001", "--horizon", "100000"]));
    assert!(v["N_epsilon"].as_u64().unwrap() <= 1000);
}

#[test]
fn chain_errors_exit_5() {
    let dir = TempDir::new().unwrap();
    let f = chain_file(&dir, &["residue 2 {0}", "residue 3 {0}"]);
    assert_eq!(cesaro(&["chain", "verify", &f, "--horizon", "100"]).status.code(), Some(5));
    let f = chain_file(&dir, &["blocks geometric 2"]);
    assert_eq!(cesaro(&["chain", "certify", &f, "--epsilon", "0.01", "--horizon", "10000"]).status.code(), Some(5));
}

#[test]
fn chain_dense_and_skeleton() {
    let dir = TempDir::new().unwrap();
    let f = chain_file(&dir, &["residue 4 {0}"]);
    let v = json(&cesaro(&["chain", "dense", &f, "--k", "2", "--horizon", "1000"]));
    let nu: Vec<String> = v["nu"].as_array().unwrap().iter().map(|x| x["exact"].as_str().unwrap().to_string()).collect();
    assert_eq!(nu.first().unwrap(), "0");
    assert_eq!(nu.last().unwrap(), "1");
    assert!(nu.contains(&"1/4".to_string()));
    let v = json(&cesaro(&["chain", "skeleton", &f, "--epsilon", "1/2", "--horizon", "1000"]));
    assert_eq!(v["elements"].as_array().unwrap().len(), 1);
}

#[test]
fn chain_psi_and_maximal() {
    let dir = TempDir::new().unwrap();
    let f = chain_file(&dir, &["residue 2 {1}"]);
    let v = json(&cesaro(&["chain", "psi", &f, "--horizon", "1000"]));
    assert_eq!(v["images"][0]["removed"], serde_json::json!([1]));
    let f = chain_file(&dir, &["explicit {2}", "explicit {2, 3}"]);
    let v = json(&cesaro(&["chain", "maximal", &f, "--universe", "4"]));
    assert_eq!(v["elements"].as_array().unwrap().len(), 5);
}

#[test]
fn quotient_check_and_closure() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "q.json", r#"{"universe": 3, "ideal": [[], [1]]}"#);
    let v = json(&cesaro(&["quotient", "check", "--spec", &spec]));
    assert_eq!(v["quotient_size"], 4);
    assert_eq!(v["axioms"]["exhaustive"], true);
    let seed = write(&dir, "seed.json", "[[1]]");
    let v = json(&cesaro(&["quotient", "closure", "--universe", "3", "--seed", &seed, "--generate"]));
    assert_eq!(v, serde_json::json!([[], [1], [2, 3], [1, 2, 3]]));
    assert_eq!(cesaro(&["quotient", "closure", "--universe", "3", "--seed", &seed]).status.code(), Some(6));
}

#[test]
fn quotient_rejects_non_ideal() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "q.json", r#"{"universe": 3, "ideal": [[], [1], [2]]}"#);
    assert_eq!(cesaro(&["quotient", "check", "--spec", &spec]).status.code(), Some(6));
    let spec = write(&dir, "q.json", r#"{"universe": 3, "ideal": "no"}"#);
    assert_eq!(cesaro(&["quotient", "check", "--spec", &spec]).status.code(), Some(2));
}

#[test]
fn quotient_equiv() {
    let v = json(&cesaro(&["quotient", "equiv", "residue 2 {0}", "union(residue 2 {0}, predicate pow2)"]));
    assert_eq!(v["value"], "Equivalent");
    let v = json(&cesaro(&["quotient", "equiv", "residue 2 {0}", "residue 4 {0}"]));
    assert_eq!(v["value"], "Distinct");
}

#[test]
fn repro_passes() {
    let o = cesaro(&["repro"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
    assert!(text.lines().count() >= 10);
}

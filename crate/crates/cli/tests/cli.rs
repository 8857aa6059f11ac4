use std::io::Write;
use std::process::{Command, Output, Stdio};

use quartic_sos::quartic::{monomial_vector, TernaryQuartic};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quartic-sos"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const NEGATIVE: &str = r#"{"p":{"400":1,"220":-3,"040":1,"004":1}}"#;

fn negative_quartic() -> TernaryQuartic {
    serde_json::from_str(NEGATIVE).unwrap()
}

fn point(v: &Value) -> [f64; 3] {
    let a = v.as_array().unwrap();
    [a[0].as_f64().unwrap(), a[1].as_f64().unwrap(), a[2].as_f64().unwrap()]
}

#[test]
fn sos_of_sum_of_fourth_powers() {
    let out = run(&["sos", "--inline", r#"{"p":{"400":1,"040":1,"004":1}}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let squares = v["certificate"]["squares"].as_array().unwrap();
    assert!(squares.len() <= 3);
    assert_eq!(v["verdict"]["sos"].as_u64().unwrap() as usize, squares.len());
}

#[test]
fn sos_of_negative_quartic_emits_witness() {
    let out = run(&["sos", "--inline", NEGATIVE]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let [x, y, z] = point(&v["witness"]["point"]);
    assert!(negative_quartic().evaluate(x, y, z) < 0.0);
}

#[test]
fn witness_subcommand() {
    let out = run_stdin(&["witness"], NEGATIVE);
    assert_eq!(out.status.code(), Some(1));
    let [x, y, z] = point(&json(&out)["witness"]);
    assert!(negative_quartic().evaluate(x, y, z) < 0.0);

    let out = run(&["witness", "--inline", r#"{"p":{"400":1}}"#]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["witness"].is_null());
}

#[test]
fn decompose_single_atom() {
    let v = monomial_vector(1.0, 2.0, 3.0);
    let a = v.outer().scaled(2.0);
    let input = serde_json::to_string(&a).unwrap();
    let out = run(&["decompose", "--inline", &input]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let atoms = json(&out)["atoms"].as_array().unwrap().clone();
    assert_eq!(atoms.len(), 1);
    let rho = atoms[0]["rho"].as_f64().unwrap();
    let p = point(&atoms[0]["point"]);
    assert!((rho - 2.0).abs() < 1e-8);
    let same = (0..3).all(|i| (p[i] - [1.0, 2.0, 3.0][i]).abs() < 1e-8);
    let flipped = (0..3).all(|i| (p[i] + [1.0, 2.0, 3.0][i]).abs() < 1e-8);
    assert!(same || flipped, "{p:?}");
}

#[test]
fn decompose_rejects_non_cone_matrix() {
    let out = run(&["decompose", "--inline", r#"{"dim":2,"upper":[1,0,1]}"#]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_round_trip_through_files() {
    let p = r#"{"p":{"400":1,"220":2,"040":1,"202":2,"022":2,"004":1}}"#;
    let out = run(&["sos", "--inline", p]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let input = format!(r#"{{"polynomial": {p}, "certificate": {}}}"#, report["certificate"]);
    let path = std::env::temp_dir().join(format!("quartic-sos-verify-{}.json", std::process::id()));
    std::fs::write(&path, &input).unwrap();
    let out = run(&["verify", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["pass"], Value::Bool(true));

    let other = r#"{"p":{"400":1,"040":1,"004":1}}"#;
    let bad = format!(r#"{{"polynomial": {other}, "certificate": {}}}"#, report["certificate"]);
    let out = run(&["verify", "--inline", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], Value::Bool(false));
    std::fs::remove_file(path).ok();
}

#[test]
fn gram_dump_shape() {
    let out = run(&["gram-dump", "--inline", r#"{"p":{"400":1,"211":4}}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["b"].as_array().unwrap().len(), 15);
    assert_eq!(v["a0"]["dim"], 6);
}

#[test]
fn output_is_deterministic() {
    let args = ["sos", "--inline", r#"{"p":{"400":2,"310":1,"040":1,"022":3,"004":1}}"#, "--seed", "5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["sos", "--inline", "{not json"],
        vec!["sos", "--inline", r#"{"p":{"500":1}}"#],
        vec!["sos", "--inline", r#"{"q":{}}"#],
        vec!["frobnicate"],
        vec!["sos", "--trials", "0", "--inline", r#"{"p":{"400":1}}"#],
        vec!["sos", "--format", "yaml", "--inline", r#"{"p":{"400":1}}"#],
        vec!["sos", "--input", "/nonexistent/file.json"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn text_format() {
    let out = run(&["sos", "--format", "text", "--inline", r#"{"p":{"400":1,"040":1,"004":1}}"#]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("sum of 3 squares"));
    assert!(s.contains("q1 = "));
}

#[test]
fn library_entry_point() {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = quartic_sos_cli::run(
        ["quartic-sos", "gram-dump"],
        &mut r#"{"parray":[1,0,0,0,0,0,0,0,0,0,1,0,0,0,1]}"#.as_bytes(),
        &mut stdout,
        &mut stderr,
    );
    assert_eq!(code, 0);
    let v: Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(v["b"][0], 1.0);
}

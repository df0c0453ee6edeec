use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const WORKED: &str = r#"{"p":["1","0"],"q":["1/2","1/2"],"p_prime":["3/4","1/4"],"q_prime":["1/2","1/2"],"gamma":0.1,"mode":"exact"}"#;
const REVERSED: &str = r#"{"p":["3/4","1/4"],"q":["1/2","1/2"],"p_prime":["1","0"],"q_prime":["1/2","1/2"],"gamma":0.1,"mode":"exact"}"#;
const SELF_PAIR: &str = r#"{"p":["3/4","1/4"],"q":["1/2","1/2"],"p_prime":["3/4","1/4"],"q_prime":["1/2","1/2"],"gamma":0.1,"mode":"exact"}"#;

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_catmaj"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn divergence_table() {
    let out = run(&["divergence", "-", "--alpha", "1"], Some(WORKED));
    assert_eq!(out.status.code(), Some(0));
    let row = &json_of(&out)["table"][0];
    assert!((row["D_source"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert!((row["D_target"].as_f64().unwrap() - 0.130812).abs() < 1e-6);

    let same = r#"{"p":["1/3","2/3"],"q":["1/3","2/3"],"p_prime":["1/3","2/3"],"q_prime":["1/3","2/3"],"gamma":0.1,"mode":"approximate","epsilon":0.1}"#;
    let out = run(&["divergence", "-"], Some(same));
    for row in json_of(&out)["table"].as_array().unwrap() {
        assert_eq!(row["D_source"].as_f64(), Some(0.0), "{row}");
    }
}

#[test]
fn malformed_input_names_the_field() {
    let out = run(&["divergence", "-"], Some(r#"{"p":["1"],"p_prime":["1"],"gamma":"x","mode":"exact"}"#));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
}

#[test]
fn check_exit_codes() {
    assert_eq!(run(&["check", "-"], Some(WORKED)).status.code(), Some(0));
    assert_eq!(run(&["check", "-"], Some(REVERSED)).status.code(), Some(1));
    assert_eq!(run(&["check", "-"], Some(SELF_PAIR)).status.code(), Some(2));
}

#[test]
fn relmaj_reports_both_methods() {
    let out = run(&["relmaj", "-", "--emit-witness"], Some(SELF_PAIR));
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["blackwell_verdict"], Value::Bool(true));
    assert_eq!(v["witness"]["entries"][0][0], "1/1");

    assert_eq!(run(&["relmaj", "-"], Some(WORKED)).status.code(), Some(0));
    let out = run(&["relmaj", "-"], Some(REVERSED));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["lp_verdict"], Value::Bool(false));
}

#[test]
fn catalyze_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = run(&["catalyze", "-", "--out", cert.to_str().unwrap()], Some(WORKED));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["verify", cert.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    doc["channel"]["entries"][0][0] = Value::String("1001/1000".into());
    let out = run(&["verify", "-"], Some(&doc.to_string()));
    assert_eq!(out.status.code(), Some(1));
    let failed = json_of(&out)["failed_checks"].to_string();
    assert!(failed.contains("q_side_exact"), "{failed}");
}

#[test]
fn catalyze_exit_codes() {
    assert_eq!(run(&["catalyze", "-"], Some(REVERSED)).status.code(), Some(2));
    let out = run(&["catalyze", "-", "--budget", "1"], Some(WORKED));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["result"], "inconclusive");
}

#[test]
fn identity_certificate_verifies() {
    let out = run(&["catalyze", "-"], Some(SELF_PAIR));
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    let out = run(&["verify", "-"], Some(&report));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reports_are_byte_stable() {
    let a = run(&["--seed", "3", "catalyze", "-"], Some(WORKED));
    let b = run(&["--seed", "3", "catalyze", "-", "--threads", "2"], Some(WORKED));
    assert_eq!(a.stdout, b.stdout);
}

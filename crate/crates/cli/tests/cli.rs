use std::process::{Command, Output};

use serde_json::Value;

fn qflag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qflag"))
        .args(args)
        .env_remove("QFLAG_RANK_CAP")
        .env_remove("QFLAG_WORD_BUDGET")
        .output()
        .expect("spawn qflag")
}

fn stdout(args: &[&str]) -> String {
    let out = qflag(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    qflag(args).status.code().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let text = stdout(&a);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", text, "not canonical");
    v
}

fn assert_dot(text: &str) {
    graphviz_rust::parse(text).unwrap_or_else(|e| panic!("bad dot: {e}\n{text}"));
}

#[test]
fn exterior_nice_rank_three() {
    assert_eq!(stdout(&["exterior", "--rank", "3", "--word", "nice"]), "dims: 1 6 15 20 15 6 1 0  classical: yes\n");
}

#[test]
fn exterior_rank_two_words() {
    for w in ["121", "212", "1,2,1", "nice-op"] {
        assert_eq!(stdout(&["exterior", "--rank", "2", "--word", w]), "dims: 1 3 3 1 0  classical: yes\n");
    }
}

#[test]
fn exterior_from_tangent_expressions() {
    let out = stdout(&["exterior", "--rank", "2", "--tangent", "E1; E2; E2*E1 - t*E1*E2", "--set", "t=q^-1"]);
    assert_eq!(out, "dims: 1 3 3 1 0  classical: yes\n");
}

#[test]
fn truncated_exterior_is_undetermined() {
    let out = stdout(&["exterior", "--rank", "3", "--word", "nice", "--kmax", "2"]);
    assert_eq!(out, "dims: 1 6 15  classical: undetermined\n");
    assert_eq!(code(&["exterior", "--rank", "3", "--word", "nice", "--kmax", "2", "--expect", "classical"]), 1);
}

#[test]
fn coideal_verdicts() {
    assert_eq!(stdout(&["coideal", "--rank", "4", "--word", "4321343234"]), "verdict: neither\n");
    assert_eq!(stdout(&["coideal", "--rank", "3", "--word", "312132"]), "verdict: right_only\n");
    assert_eq!(stdout(&["coideal", "--rank", "3", "--word", "321323"]), "verdict: two_sided\n");
    let out = stdout(&["coideal", "--rank", "4", "--word", "4321343234", "--witness"]);
    assert!(out.lines().nth(1).is_some_and(|l| l.starts_with("witness (left): ")), "{out}");
    assert!(out.lines().nth(2).is_some_and(|l| l.starts_with("witness (right): ")), "{out}");
}

#[test]
fn expect_gates_exit_status() {
    assert_eq!(code(&["coideal", "--rank", "3", "--word", "321323", "--expect", "two-sided"]), 0);
    assert_eq!(code(&["coideal", "--rank", "3", "--word", "312132", "--expect", "two-sided"]), 1);
    assert_eq!(code(&["coideal", "--rank", "3", "--word", "312132", "--expect", "calculus"]), 0);
    assert_eq!(code(&["coideal", "--rank", "4", "--word", "4321343234", "--expect", "calculus"]), 1);
    assert_eq!(code(&["exterior", "--rank", "3", "--word", "nice", "--expect", "classical"]), 0);
    assert_eq!(code(&["exterior", "--rank", "3", "--word", "nice", "--expect", "non-classical"]), 1);
}

#[test]
fn bad_input_exits_two() {
    for args in [
        &["coideal", "--rank", "3", "--word", "1213"][..],
        &["coideal", "--rank", "3", "--word", "121322"],
        &["coideal", "--rank", "9", "--word", "nice"],
        &["coideal", "--rank", "3"],
        &["coproduct", "--rank", "2", "--expr", "E1*("],
        &["coproduct", "--rank", "2", "--expr", "E3"],
        &["exterior", "--rank", "2", "--tangent", "E1; E1"],
        &["exterior", "--rank", "2", "--tangent", "F1"],
        &["exterior", "--rank", "2", "--tangent", "E1; t*E2"],
        &["exterior", "--rank", "2", "--word", "nice", "--order", "e21,e21,e32"],
        &["relations", "--rank", "2", "--word", "nice", "--format", "dot"],
        &["no-such-command"],
    ] {
        assert_eq!(code(args), 2, "{args:?}");
    }
}

#[test]
fn rank_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qflag"))
        .args(["roots", "--rank", "3"])
        .env("QFLAG_RANK_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(code(&["roots", "--rank", "3", "--rank-cap", "3"]), 0);
}

#[test]
fn roots_and_coproduct() {
    assert_eq!(stdout(&["roots", "--rank", "2"]), "a12  (1,0)\na13  (1,1)\na23  (0,1)\n");
    assert_eq!(stdout(&["roots", "--rank", "2", "--word", "121"]), "a12  E1\na13  E2*E1 - q*E1*E2\na23  E2\n");
    assert_eq!(stdout(&["roots", "--rank", "2", "--word", "212"]), "a23  E2\na13  E2*E1 - q^-1*E1*E2\na12  E1\n");
    assert_eq!(stdout(&["coproduct", "--rank", "1", "--expr", "E1"]), "E1 ⊗ K1 + 1 ⊗ E1\n");
    assert_eq!(stdout(&["coproduct", "--rank", "1", "--expr", "F1"]), "F1 ⊗ 1 + K1^-1 ⊗ F1\n");
}

#[test]
fn pairing() {
    assert_eq!(stdout(&["pair", "--rank", "1", "--expr", "K1", "--oq", "u[1,1]"]), "q^-1\n");
    assert_eq!(stdout(&["pair", "--rank", "1", "--expr", "K1", "--oq", "u[2,2]"]), "q\n");
    assert_eq!(stdout(&["pair", "--rank", "1", "--expr", "E1", "--oq", "u[2,1]"]), "1\n");
    assert_eq!(stdout(&["pair", "--rank", "1", "--expr", "F1", "--oq", "u[1,2]"]), "1\n");
    assert_eq!(stdout(&["pair", "--rank", "1", "--expr", "E1", "--oq", "u[1,2]"]), "0\n");
    assert_eq!(stdout(&["pair", "--rank", "2", "--expr", "E1*E2", "--oq", "u[2,1]*u[3,2]"]), "1\n");
}

#[test]
fn frobenius_and_lines() {
    let out = stdout(&["frobenius", "--rank", "2", "--word", "nice"]);
    assert!(out.starts_with("top degree: 3  top dimension: 1\n"), "{out}");
    assert_eq!(out.lines().filter(|l| l.ends_with(": nondegenerate")).count(), 4, "{out}");
    assert_eq!(stdout(&["lines", "--rank", "2", "--word", "nice", "--k", "2"]), "(1,1)\n(1,2)\n(2,1)\n");
}

#[test]
fn grassmann_and_kernel() {
    let out = stdout(&["grassmann", "--rank", "3", "--word", "nice", "--r", "2"]);
    assert!(out.contains("ad-closed: yes"), "{out}");
    assert_eq!(stdout(&["dbar-kernel", "--rank", "2", "--word", "nice"]).lines().next(), Some("dimension: 3"));
}

#[test]
fn json_reports_round_trip() {
    let v = json(&["coideal", "--rank", "3", "--word", "312132"]);
    assert_eq!(v["verdict"], "right_only");
    assert!(v["witness"].as_array().is_some_and(|w| !w.is_empty()));
    let v = json(&["exterior", "--rank", "3", "--word", "nice"]);
    assert_eq!(v["classical"], true);
    assert_eq!(v["dims"], serde_json::json!([1, 6, 15, 20, 15, 6, 1, 0]));
    let v = json(&["frobenius", "--rank", "2", "--word", "nice"]);
    assert!(v["nakayama_sign"].is_array());
    for args in [
        &["roots", "--rank", "3"][..],
        &["roots", "--rank", "2", "--word", "nice"],
        &["coproduct", "--rank", "2", "--expr", "E1*E2"],
        &["pair", "--rank", "1", "--expr", "K1", "--oq", "u[2,2]"],
        &["relations", "--rank", "2", "--word", "nice"],
        &["lines", "--rank", "2", "--word", "nice", "--k", "1"],
        &["grassmann", "--rank", "3", "--word", "nice", "--r", "1"],
        &["dbar-kernel", "--rank", "2", "--word", "nice"],
        &["classes", "--rank", "3"],
    ] {
        json(args);
    }
}

#[test]
fn survey_rank_three() {
    let v = json(&["survey", "--rank", "3"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let reps: Vec<&str> = rows.iter().map(|r| r["representative"].as_str().unwrap()).collect();
    let mut sorted = reps.clone();
    sorted.sort();
    assert_eq!(reps, sorted);
    let two: Vec<&str> =
        rows.iter().filter(|r| r["verdict"] == "two_sided").map(|r| r["representative"].as_str().unwrap()).collect();
    assert_eq!(two, ["121321", "321323"]);
    assert_eq!(rows.iter().map(|r| r["class_size"].as_u64().unwrap()).sum::<u64>(), 16);
    assert!(v["truncated"].is_null());
}

#[test]
fn survey_text_is_deterministic() {
    let a = stdout(&["survey", "--rank", "3"]);
    assert_eq!(a, stdout(&["survey", "--rank", "3"]));
    assert_eq!(a.lines().count(), 8);
    assert!(a.lines().all(|l| l.contains("  dims: ")));
}

#[test]
fn survey_over_budget_is_marked_truncated() {
    let out = stdout(&["survey", "--rank", "3", "--word-budget", "4"]);
    assert_eq!(out.lines().filter(|l| l.contains("two_sided")).count(), 2);
    assert!(out.lines().last().unwrap().starts_with("truncated: "), "{out}");
    let v = json(&["survey", "--rank", "3", "--word-budget", "4"]);
    assert!(v["truncated"].is_string());
    assert!(v["rows"][0]["class_size"].is_null());
}

#[test]
fn dot_outputs_parse() {
    let classes = stdout(&["classes", "--rank", "3", "--format", "dot", "--involution"]);
    assert!(classes.starts_with("graph "));
    assert_eq!(classes.matches("[label=").count(), 8);
    assert_dot(&classes);
    assert_dot(&stdout(&["classes", "--rank", "4", "--format", "dot"]));
    assert_dot(&stdout(&["survey", "--rank", "3", "--format", "dot"]));
    assert_dot(&stdout(&["survey", "--rank", "3", "--format", "dot", "--word-budget", "4"]));
}

//! Black-box tests of the command-line interface: output formats, exit
//! codes and the resource guard.

use std::process::{Command, Output};

use hopfgraph::weight::parse_rat;
use hopfgraph::GraphSum;

fn hopfgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopfgraph"))
        .args(args)
        .env_remove("HOPFGRAPH_MAX_EDGES")
        .env_remove("HOPFGRAPH_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn enum_json_stream() {
    // one loop on one vertex: the single self-loop graph, weight 1/2
    let out = hopfgraph(&["enum", "--loops", "1", "--vertices", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(lines.len(), 2);
    let term: serde_json::Value = lines[0].parse().unwrap();
    assert_eq!(term["weight"], "1/2");
    assert_eq!(term["graph"]["v"], 1);
    let footer: serde_json::Value = lines[1].parse().unwrap();
    assert_eq!(footer["terms"], 1);
    assert_eq!(footer["total_weight"], "1/2");
}

#[test]
fn enum_table_checks_symmetry() {
    let out = hopfgraph(&[
        "enum", "--loops", "1", "--vertices", "2", "--legs", "1", "--format", "table",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("ok"));
    assert!(!text.contains("MISMATCH"));
}

#[test]
fn enum_dot_output() {
    let out = hopfgraph(&[
        "enum", "--loops", "0", "--vertices", "2", "--legs", "1", "--format", "dot",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("graph g0 {"));
    assert!(text.contains("v1 -- v2;"));
}

#[test]
fn export_round_trips() {
    let out = hopfgraph(&["export", "--loops", "2", "--vertices", "2", "--legs", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = stdout(&out).trim().parse().unwrap();
    let sum = GraphSum::from_json(&doc).unwrap();
    assert!(!sum.is_empty());
    // unordered sums obey the weight law, so the total is a sum of 1/S
    for (g, w) in sum.iter() {
        let s = g.symmetry_factor().unwrap();
        assert_eq!(w * hopfgraph::Rat::from(num::BigInt::from(s)), parse_rat("1").unwrap());
    }
}

#[test]
fn eval_matches_known_coefficients() {
    // phi^3 two-point function: 1 + g^2 + 25/8 g^4
    let out = hopfgraph(&["eval", "--model", "phi3", "--legs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("1: 1"), "{text}");
    assert!(text.contains("g^2: 1"), "{text}");
    assert!(text.contains("g^4: 25/8"), "{text}");

    // phi^4 four-point function at low order: g + 7/2 g^2
    let out = hopfgraph(&[
        "eval", "--model", "phi4", "--legs", "4", "--max-order", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("g: 1"), "{text}");
    assert!(text.contains("g^2: 7/2"), "{text}");
}

#[test]
fn eval_one_point_convention() {
    // raw tadpole value vs. the vanishing-tadpole convention
    let raw = hopfgraph(&["eval", "--model", "phi3", "--legs", "1", "--max-order", "1"]);
    assert_eq!(raw.status.code(), Some(0));
    assert!(stdout(&raw).contains("g: 1/2"));
    let dropped = hopfgraph(&[
        "eval", "--model", "phi3", "--legs", "1", "--max-order", "1", "--drop-one-point",
    ]);
    assert_eq!(dropped.status.code(), Some(0));
    assert_eq!(stdout(&dropped).trim(), "0");
}

#[test]
fn check_suites_pass() {
    for suite in ["weights", "equivalence", "trees"] {
        let out = hopfgraph(&["check", "--suite", suite, "--max-edges", "3"]);
        assert_eq!(out.status.code(), Some(0), "suite {suite}: {}", stdout(&out));
        assert!(stdout(&out).contains("ok"));
    }
}

#[test]
fn trees_reports_weight_ones() {
    let out = hopfgraph(&["trees", "--vertices", "3", "--legs", "5", "--modified"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let summary: serde_json::Value = text.lines().last().unwrap().parse().unwrap();
    assert_eq!(summary["weight_violations"], 0);
    assert!(summary["trees"].as_u64().unwrap() > 0);
}

#[test]
fn exit_codes() {
    // unknown flag: clap's usage error
    let out = hopfgraph(&["enum", "--loops", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // bad model file
    let out = hopfgraph(&["eval", "--model", "/nonexistent.toml", "--legs", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // resource guard
    let out = hopfgraph(&["enum", "--loops", "9", "--vertices", "3", "--max-edges", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("resource guard"));
}

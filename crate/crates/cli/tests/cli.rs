use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn offload(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offload")).args(args).output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn json_error(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn randomized_commands_require_a_seed() {
    for args in [
        &["gen", "--users", "3"][..],
        &["run", "--users", "3"],
        &["experiment", "scaling", "--trials", "1"],
    ] {
        let err = json_error(&offload(args));
        assert_eq!(err["error"], "usage");
        assert!(err["message"].as_str().unwrap().contains("seed"));
    }
}

#[test]
fn errors_are_machine_readable() {
    let err = json_error(&offload(&[
        "nash-check",
        "--seed",
        "1",
        "--users",
        "3",
        "--profile",
        "01x",
    ]));
    assert_eq!(err["error"], "malformed_profile");
    let err = json_error(&offload(&[
        "nash-check",
        "--seed",
        "1",
        "--users",
        "3",
        "--profile",
        "01",
    ]));
    assert_eq!(err["error"], "profile_length");
    let err = json_error(&offload(&["gen", "--seed", "1", "--bandwidth=-5"]));
    assert_eq!(err["error"], "invalid_parameter");
    let out = offload(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_error(&out)["error"], "usage");
}

#[test]
fn config_files_reject_unknown_keys_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"users": 4, "colour": "red"}"#).unwrap();
    assert_eq!(
        json_error(&offload(&["gen", "--seed", "1", "--config", path(&bad)]))["error"],
        "json"
    );

    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"users": 4, "bandwidth": 1e6}"#).unwrap();
    let s = json_stdout(&offload(&[
        "gen",
        "--seed",
        "1",
        "--config",
        path(&good),
        "--users",
        "6",
    ]));
    assert_eq!(s["users"].as_array().unwrap().len(), 6);
    assert_eq!(s["bandwidth"], 1e6);
}

#[test]
fn gen_then_analyse_a_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    let gen = offload(&["gen", "--seed", "2024", "--users", "4", "--out", path(&file)]);
    assert!(gen.status.success());
    let again = json_stdout(&offload(&["gen", "--seed", "2024", "--users", "4"]));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(saved, again);

    let scenario = ["--scenario", path(&file)];
    let poa = json_stdout(&offload(&[&["poa"][..], &scenario].concat()));
    assert_eq!(poa["equilibria"], serde_json::json!(["0110"]));
    assert_eq!(poa["optimum"]["profile"], "0100");

    let check = json_stdout(&offload(
        &[&["nash-check", "--profile", "0110"][..], &scenario].concat(),
    ));
    assert_eq!(check["is_nash"], true);
    let check = json_stdout(&offload(
        &[&["nash-check", "--profile", "1111"][..], &scenario].concat(),
    ));
    assert_eq!(check["is_nash"], false);
    assert!(!check["improvers"].as_array().unwrap().is_empty());

    let opt = json_stdout(&offload(&[&["optimum"][..], &scenario].concat()));
    assert_eq!(opt["profile"], "0100");
    assert_eq!(opt["method"], "exhaustive");

    let trace = dir.path().join("trace.csv");
    let run = json_stdout(&offload(
        &[&["run", "--seed", "3", "--trace", path(&trace)][..], &scenario].concat(),
    ));
    assert_eq!(run["converged"], true);
    assert_eq!(run["is_nash"], true);
    assert_eq!(run["final_profile"], "0110");
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(lines.lines().count() as u64, run["slots"].as_u64().unwrap() + 1);
}

#[test]
fn homogeneous_from_ratios() {
    let out = json_stdout(&offload(&["homogeneous", "--ratios", "5,4,3,2"]));
    assert_eq!(out["members"], serde_json::json!([0, 1, 2]));
    let err = json_error(&offload(&["homogeneous", "--ratios", "-1,-2"]));
    assert_eq!(err["error"], "no_beneficial_group");
    let err = json_error(&offload(&["homogeneous", "--seed", "1", "--users", "3"]));
    assert_eq!(err["error"], "not_homogeneous");
}

#[test]
fn saved_results_re_emit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    let saved = dir.path().join("result.json");
    let out = json_stdout(&offload(&[
        "experiment",
        "sweep-b",
        "--seed",
        "4",
        "--trials",
        "2",
        "--users",
        "5",
        "--grid",
        "1e6,4e6",
        "--out-dir",
        path(&first),
        "--save-result",
        path(&saved),
    ]));
    assert_eq!(out["files"].as_array().unwrap().len(), 4);
    json_stdout(&offload(&[
        "emit",
        "--result",
        path(&saved),
        "--out-dir",
        path(&second),
        "--format",
        "csv",
    ]));
    for name in ["sweep-b_4.csv", "sweep-b-aggregate_4.csv", "sweep-b_4.schema.json"] {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap()
        );
    }
    assert!(!second.join("sweep-b_4.svg").exists());
}

#[test]
fn scaling_grid_must_hold_user_counts() {
    let dir = tempfile::tempdir().unwrap();
    let err = json_error(&offload(&[
        "experiment",
        "scaling",
        "--seed",
        "1",
        "--grid",
        "2.5",
        "--out-dir",
        path(dir.path()),
    ]));
    assert_eq!(err["error"], "usage");
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use keyshare::protocol::Transcript;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_keyshare"));
    c.env_remove("KEYSHARE_PROFILE_CACHE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn three_agent() -> String {
    golden("three_agent.json").to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Structural equality with numbers compared to `tol`.
fn json_close(a: &Value, b: &Value, tol: f64) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => (x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= tol,
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| json_close(p, q, tol)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| json_close(v, w, tol)))
        }
        _ => a == b,
    }
}

fn rates(v: &Value) -> Vec<f64> {
    v["rates"].as_array().unwrap().iter().map(|r| r.as_f64().unwrap()).collect()
}

#[test]
fn analyze_matches_golden() {
    let out = run(&["analyze", "--spec", &three_agent()]);
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(golden("three_agent_analyze.json")).unwrap()).unwrap();
    assert!(json_close(&stdout_json(&out), &expected, 1e-12));
}

#[test]
fn analyze_value_table_and_verdicts() {
    let v = stdout_json(&run(&["analyze", "--spec", &three_agent()]));
    let table: Vec<f64> = v["game"]["v"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let expected = [0.0, 0.17134, 0.08205, 0.28771, 0.10142, 0.31679, 0.20155, 0.46921];
    for (a, b) in table.iter().zip(expected) {
        assert!((a - b).abs() < 1e-5, "{table:?}");
    }
    assert_eq!(v["superadditive"]["holds"], true);
    assert_eq!(v["supermodular"]["holds"], true);
    assert_eq!(v["core_bounds"].as_array().unwrap().len(), 7);
}

#[test]
fn allocate_matches_golden() {
    let out = run(&["allocate", "--spec", &three_agent(), "--trace"]);
    let expected: Value =
        serde_json::from_str(&std::fs::read_to_string(golden("three_agent_allocate.json")).unwrap()).unwrap();
    let mut got = stdout_json(&out);
    // the two Shapley routes differ by rounding only
    assert!(got["shapley_routes_gap"].as_f64().unwrap() < 1e-9);
    got["shapley_routes_gap"] = expected["shapley_routes_gap"].clone();
    assert!(json_close(&got, &expected, 1e-12));
}

#[test]
fn allocate_lands_in_published_intervals() {
    let v = stdout_json(&run(&["allocate", "--spec", &three_agent(), "--method", "both"]));
    let allocs = v["allocations"].as_array().unwrap();
    let sh = rates(&allocs[0]);
    let nu = rates(&allocs[1]);
    let inside = |r: &[f64], iv: [(f64, f64); 3]| r.iter().zip(iv).all(|(x, (lo, hi))| lo <= *x && *x <= hi);
    assert!(inside(&sh, [(0.2165, 0.2166), (0.1142, 0.1143), (0.1384, 0.1385)]), "{sh:?}");
    assert!(inside(&nu, [(0.2109, 0.2110), (0.1172, 0.1173), (0.1410, 0.1411)]), "{nu:?}");
    assert!(allocs.iter().all(|a| a["in_core"] == true));
}

#[test]
fn polytope_csv_matches_golden() {
    let out = run(&["allocate", "--spec", &three_agent(), "--format", "csv"]);
    assert!(out.status.success());
    let got = String::from_utf8(out.stdout).unwrap();
    let expected = std::fs::read_to_string(golden("three_agent_polytope.csv")).unwrap();
    let parse = |s: &str| -> Vec<(String, Vec<f64>)> {
        s.lines()
            .skip(1)
            .map(|l| {
                let mut f = l.split(',');
                (f.next().unwrap().to_string(), f.map(|x| x.parse().unwrap()).collect())
            })
            .collect()
    };
    assert_eq!(got.lines().next(), Some("kind,r1,r2,r3"));
    let (g, e) = (parse(&got), parse(&expected));
    assert_eq!(g.len(), e.len());
    for ((gk, gv), (ek, ev)) in g.iter().zip(&e) {
        assert_eq!(gk, ek);
        assert!(gv.iter().zip(ev).all(|(a, b)| (a - b).abs() < 1e-12));
    }
    assert_eq!(g.iter().filter(|(k, _)| k == "core_vertex").count(), 6);
}

#[test]
fn exported_game_gives_identical_allocations() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("game.json");
    let out = run(&["analyze", "--spec", &three_agent(), "--export-game", game.to_str().unwrap()]);
    assert!(out.status.success());
    let from_spec = stdout_json(&run(&["allocate", "--spec", &three_agent()]));
    let from_game = stdout_json(&run(&["allocate", "--game", game.to_str().unwrap()]));
    assert_eq!(from_spec["allocations"], from_game["allocations"]);
    assert!(from_game["shapley_routes_gap"].is_null());
}

#[test]
fn malformed_json_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.json", "{\"q\": 0.4, \"p\": [0.2,");
    let out = run(&["analyze", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EOF while parsing"));
}

#[test]
fn out_of_range_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", r#"{"q": 0.4, "p": [0.2, 1.5]}"#);
    let out = run(&["analyze", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p[1]"));
}

#[test]
fn missing_input_and_bad_flags_exit_1() {
    assert_eq!(run(&["analyze", "--spec", "/nonexistent/spec.json"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "everything"]).status.code(), Some(1));
    assert_eq!(run(&["allocate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--spec", &three_agent(), "--seed", "xyz"]).status.code(), Some(1));
}

#[test]
fn useless_observations_give_a_zero_table() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "half.json", r#"{"q": 0.3, "p": [0.5, 0.5, 0.5]}"#);
    let v = stdout_json(&run(&["analyze", "--spec", &spec]));
    assert!(v["game"]["v"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap().abs() < 1e-12));
}

#[test]
fn single_agent_gets_its_value() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "one.json", r#"{"q": 0.4, "p": [0.2]}"#);
    let v = stdout_json(&run(&["allocate", "--spec", &spec, "--method", "both"]));
    let v1 = v["game"]["v"][1].as_f64().unwrap();
    for a in v["allocations"].as_array().unwrap() {
        assert!((rates(a)[0] - v1).abs() < 1e-12);
    }
}

#[test]
fn empty_core_fails_for_nucleolus_only() {
    let dir = tempfile::tempdir().unwrap();
    // v({1}) + v({2}) > v({1,2})
    let game = write(dir.path(), "game.json", r#"{"L": 2, "v": [0.0, 0.4, 0.4, 0.5]}"#);
    let sh = stdout_json(&run(&["allocate", "--game", &game, "--method", "shapley"]));
    assert_eq!(sh["allocations"][0]["in_core"], false);
    let out = run(&["allocate", "--game", &game, "--method", "nucleolus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("core is empty"));
}

#[test]
fn simulate_rejects_zero_runs() {
    let out = run(&["simulate", "--spec", &three_agent(), "--runs", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("runs"));
}

fn small_sim(extra: &[&str]) -> Value {
    let spec = three_agent();
    let mut args = vec!["simulate", "--spec", &spec, "--N", "64", "--B", "2", "--runs", "6"];
    args.extend_from_slice(extra);
    let mut v = stdout_json(&run(&args));
    v["runtime_secs"] = Value::Null;
    v
}

#[test]
fn simulate_is_deterministic() {
    assert_eq!(small_sim(&[]), small_sim(&[]));
    assert_eq!(small_sim(&["--seed", "0x1f"]), small_sim(&["--seed", "1F"]));
    assert_ne!(small_sim(&[]), small_sim(&["--seed", "0x2"]));
    assert_eq!(small_sim(&[])["config"]["seed"], 0xC0A117);
}

#[test]
fn simulate_uses_allocation_file_and_coalition() {
    let dir = tempfile::tempdir().unwrap();
    let alloc = write(dir.path(), "a.json", r#"{"method": "shapley", "rates": [0.1, 0.05]}"#);
    let v = small_sim(&["--allocation", &alloc, "--coalition", "1,3"]);
    let agents: Vec<u64> = v["agents"].as_array().unwrap().iter().map(|a| a["agent"].as_u64().unwrap()).collect();
    assert_eq!(agents, vec![1, 3]);
    assert_eq!(v["agents"][1]["target_rate"], 0.05);
    let wrong = write(dir.path(), "b.json", r#"{"method": "shapley", "rates": [0.1]}"#);
    let out = run(&["simulate", "--spec", &three_agent(), "--N", "64", "--allocation", &wrong, "--coalition", "1,3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn transcript_and_manifest_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.bin");
    let m = dir.path().join("m.json");
    let o = dir.path().join("r.json");
    let out = run(&[
        "simulate", "--spec", &three_agent(), "--N", "64", "--B", "2", "--runs", "2",
        "--transcript", t.to_str().unwrap(), "--manifest", m.to_str().unwrap(), "--out", o.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tr = Transcript::from_frames(&std::fs::read(&t).unwrap()).unwrap();
    assert_eq!(tr.blocks.len(), 6);
    assert_eq!(tr.hash_seeds.len(), 3);
    let man: Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(man["command"], "simulate");
    assert_eq!(man["seed"], "0xC0A117");
    assert_eq!(man["overrides"]["N"], 64);
    assert_eq!(man["outputs"].as_array().unwrap().len(), 2);
    assert!(o.exists());
}

#[test]
fn desk_scale_simulation() {
    let v = stdout_json(&run(&["simulate", "--spec", &three_agent()]));
    assert!(v["agreement_failure_rate"].as_f64().unwrap() <= 0.1);
    assert!(v["sum_rate"].as_f64().unwrap() >= 0.9 * (0.46921 - 3.0 * 0.05));
    assert!(v["chi2_p"].as_f64().unwrap() >= 0.01);
}

#[test]
fn verify_suites_pass() {
    for suite in ["game", "allocation", "polar", "secrecy"] {
        let out = run(&["verify", suite]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["failed"], 0);
    }
}

#[test]
fn verify_accepts_a_custom_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"q": 0.5, "p": [0.1, 0.4]}"#);
    let out = run(&["verify", "game", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn sweep_emits_csv() {
    let out = run(&["sweep", "--spec", &three_agent(), "--N", "32,64", "--B", "2", "--runs", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,agent,target_rate,achieved_rate,agreement_failure_rate,sum_rate");
    assert_eq!(lines.len(), 1 + 2 * 3);
}

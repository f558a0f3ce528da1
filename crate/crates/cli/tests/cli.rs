use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ALPHA: &str = r#"{"family":"power-law","a":1,"b":1,"p":1}"#;
const THETA: &str = r#"{"family":"rational","a":1,"b":10,"q":2}"#;

fn tsql_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsql-lab")).args(args).env_remove("TSQL_LAB_OUT").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_config(dir: &Path, episodes: u64) -> String {
    let path = dir.join("cfg.json");
    let text = format!(
        r#"{{"experiment":"bias","algorithms":[{{"name":"ql"}},{{"name":"tsql"}}],
            "alpha":{ALPHA},"theta":{THETA},"episodes":{episodes},"independent_runs":4,"seed":5}}"#
    );
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_schedule_accepts_the_bias_pair() {
    let v = json(&tsql_lab(&["validate-schedule", "--alpha", ALPHA, "--theta", THETA]));
    assert_eq!(v["theta_conditions_hold"], true);
    assert_eq!(v["step_size_conditions_hold"], true);
    assert_eq!(v["alpha_theta_summable"], "yes");
}

#[test]
fn constant_theta_is_flagged() {
    let v = json(&tsql_lab(&["validate-schedule", "--alpha", ALPHA, "--theta", r#"{"family":"constant","a":0.5}"#]));
    assert_eq!(v["theta_conditions_hold"], false);
    assert_eq!(v["monotone_decreasing_abs"], false);
}

#[test]
fn solve_roulette_walk_away_is_worth_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mdp = dir.path().join("roulette.json");
    let built = tsql_lab(&["env", "build", "--name", "roulette", "--noise-free", "--out", mdp.to_str().unwrap()]);
    assert!(built.status.success());
    let v = json(&tsql_lab(&["solve", mdp.to_str().unwrap(), "--lse", "10000"]));
    assert_eq!(v["q"][0][0], 0.0);
    assert!((v["q"][0][1].as_f64().unwrap() + 0.0526).abs() < 1e-9);
    assert_eq!(v["j"][0], 0.0);
    let bound = v["lse"]["gap_bound"].as_f64().unwrap();
    assert!((bound - 0.99 * 39f64.ln() / (10000.0 * 0.01)).abs() < 1e-12);
    assert!(v["lse"]["gap"].as_f64().unwrap() <= bound);
}

#[test]
fn bound_prints_m_and_d() {
    let zero = r#"{"family":"constant","a":0}"#;
    let v = json(&tsql_lab(&[
        "bound", "--c-max", "1", "--discount", "0.6", "--alpha", ALPHA, "--theta", zero, "--lse", "10000",
        "--num-actions", "5",
    ]));
    assert!((v["M"].as_f64().unwrap() - 2.5).abs() < 1e-12);
    assert!((v["D"].as_f64().unwrap() - 2.5004).abs() < 1e-4);
}

#[test]
fn env_build_random_is_seeded() {
    let a = tsql_lab(&["env", "build", "--name", "random", "--seed", "7"]);
    let b = tsql_lab(&["env", "build", "--name", "random", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["num_states"], 10);
    assert_eq!(v["num_actions"], 5);
}

#[test]
fn zero_episode_run_writes_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0);
    let out = dir.path().join("out");
    let run = tsql_lab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(fs::read_to_string(out.join("left_probability.csv")).unwrap(), "step,algorithm,value,stderr\n");
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap(), "algorithm,metric,value\n");
}

#[test]
fn runs_are_reproducible_and_seed_overridable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 20);
    let read = |name: &str| fs::read(dir.path().join(name).join("left_probability.csv")).unwrap();
    for (name, extra) in [("a", None), ("b", None), ("c", Some("6"))] {
        let out = dir.path().join(name);
        let mut args = vec!["run", "--config", &cfg, "--out", out.to_str().unwrap()];
        if let Some(seed) = extra {
            args.extend(["--seed", seed]);
        }
        assert!(tsql_lab(&args).status.success());
    }
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    let meta: Value = serde_json::from_slice(&fs::read(dir.path().join("c").join("record.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 6);
}

#[test]
fn output_dir_falls_back_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 3);
    let out = dir.path().join("from-env");
    let status = Command::new(env!("CARGO_BIN_EXE_tsql-lab"))
        .args(["run", "--config", &cfg, "--workers", "2"])
        .env("TSQL_LAB_OUT", &out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("summary.csv").exists());
}

#[test]
fn exit_codes() {
    assert_eq!(tsql_lab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tsql_lab(&["run", "--config", "/nonexistent/cfg.json", "--out", "/tmp/x"]).status.code(), Some(1));
    assert_eq!(tsql_lab(&["validate-schedule", "--alpha", "{", "--theta", THETA]).status.code(), Some(1));
    // unreadable model file is a runtime failure, not a config problem
    assert_eq!(tsql_lab(&["solve", "/nonexistent/mdp.json"]).status.code(), Some(2));
    assert_eq!(tsql_lab(&["--help"]).status.code(), Some(0));
}

use std::fs;
use std::process::{Command, Output};

use proptest::prelude::*;
use time4_lab::units::parse_duration;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_time4-lab")).args(args).env_remove("TIME4_LAB_SEED").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn scenario(text: &str) -> tempfile::NamedTempFile {
    let file = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    fs::write(file.path(), text).unwrap();
    file
}

#[test]
fn prove_exit_codes() {
    let ok = lab(&["prove", "--theorem", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("verdict: certified"), "{}", stdout(&ok));

    assert_eq!(lab(&["prove", "--theorem", "3", "--alpha", "0.6"]).status.code(), Some(2));
    assert_eq!(lab(&["prove", "--theorem", "5", "--n", "2"]).status.code(), Some(2));
    assert_eq!(lab(&["prove", "--theorem", "1", "--nu", "0.1"]).status.code(), Some(2));
    assert_eq!(lab(&["prove", "--theorem", "9"]).status.code(), Some(2));
}

#[test]
fn prove_writes_a_json_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t3.json");
    let out = lab(&["prove", "--theorem", "3", "--alpha", "1/4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert!(doc.to_string().contains("1/4"));
}

#[test]
fn codec_encodes_the_zero_time() {
    let out = lab(&["codec", "encode", "time", "--at", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "0".repeat(32));
}

#[test]
fn codec_scheduled_commit_round_trips() {
    let enc = lab(&["codec", "encode", "control", "--type", "commit", "--at", "10.5", "--xid", "7"]);
    assert_eq!(enc.status.code(), Some(0));
    let hex = stdout(&enc).trim().to_string();
    assert_eq!(hex.len(), 80);
    let dec = lab(&["codec", "decode", &hex]);
    assert_eq!(dec.status.code(), Some(0), "{}", stderr(&dec));
    let text = stdout(&dec);
    assert!(text.contains("10.500000000"), "{text}");
    let explained = lab(&["codec", "decode", &hex, "--explain"]);
    assert!(stdout(&explained).lines().count() > 5);
}

#[test]
fn codec_rejects_bad_input() {
    assert_eq!(lab(&["codec", "decode", "zz"]).status.code(), Some(2));
    // A scheduled commit cut short inside the time property.
    let enc = lab(&["codec", "encode", "control", "--type", "commit", "--at", "1"]);
    let hex = stdout(&enc).trim().to_string();
    let cut = lab(&["codec", "decode", &hex[..60], "--kind", "control"]);
    assert_eq!(cut.status.code(), Some(1));
    assert!(stderr(&cut).contains("offset") || stdout(&cut).contains("offset"), "{}", stderr(&cut));
}

#[test]
fn codec_error_message() {
    let out = lab(&["codec", "encode", "error", "--code", "sched-past"]);
    assert_eq!(stdout(&out).trim(), "0601000c0000000000110012");
    let dec = lab(&["codec", "decode", "0601000c0000000000110012"]);
    assert!(stdout(&dec).contains("SCHED_PAST"), "{}", stdout(&dec));
}

#[test]
fn scenario_errors_point_at_the_field() {
    let file = scenario("{\n  \"version\": 1,\n  \"topology\": { \"n\": \"four\" },\n  \"strategy\": { \"kind\": \"time4\" }\n}");
    let out = lab(&["simulate", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("topology.n") && err.contains("line 3"), "{err}");
}

#[test]
fn scenario_rejects_unknown_versions_and_fields() {
    let v2 = scenario(r#"{"version": 2, "topology": {"n": 2}, "strategy": {"kind": "time4"}}"#);
    assert_eq!(lab(&["simulate", v2.path().to_str().unwrap()]).status.code(), Some(2));
    let extra = scenario(r#"{"version": 1, "topology": {"n": 2}, "strategy": {"kind": "time4"}, "colour": 1}"#);
    let out = lab(&["simulate", extra.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"));
    let kind = scenario(r#"{"version": 1, "topology": {"n": 2}, "strategy": {"kind": "teleport"}}"#);
    assert_eq!(lab(&["simulate", kind.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn empty_sweep_is_one_grid_point() {
    let file = scenario(r#"{"version": 1, "topology": {"n": 4}, "strategy": {"kind": "untimed"}, "sweep": {}, "seeds": 3}"#);
    let out = lab(&["simulate", file.path().to_str().unwrap(), "--summary"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 2);
    let rows = lab(&["simulate", file.path().to_str().unwrap()]);
    assert_eq!(stdout(&rows).lines().count(), 4);
}

#[test]
fn sweep_multiplies_the_grid() {
    let file = scenario(
        r#"{"version": 1, "topology": {"n": 2}, "strategy": {"kind": "time4"},
            "sweep": {"strategies": ["time4", "untimed", "swan:1/10"], "n": [2, 3]}, "seeds": 2}"#,
    );
    let out = lab(&["simulate", file.path().to_str().unwrap(), "--summary"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 6);
}

#[test]
fn explicit_flows_and_offsets() {
    let file = scenario(
        r#"{"version": 1, "topology": {"n": 2, "capacity_mbps": 10},
            "flows": [{"id": 1, "rate_mbps": 5, "switch": 0, "edge": 0},
                      {"id": 2, "rate_mbps": "5", "switch": 1, "edge": 1},
                      {"id": 3, "rate_mbps": 5, "switch": 0, "edge": 0},
                      {"id": 4, "rate_mbps": 5, "switch": 1, "edge": 1}],
            "moves": [{"flow": 1, "to": 1}, {"flow": 2, "to": 0}],
            "offsets_ms": [3.5, -2],
            "params": {"sched_error_ms": 0, "install_range_ms": 0},
            "strategy": {"kind": "time4"}, "seeds": 2}"#,
    );
    let out = lab(&["simulate", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let col = reader.headers().unwrap().iter().position(|h| h == "lost_packets").unwrap();
    for rec in reader.records() {
        assert_eq!(rec.unwrap()[col].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn fixed_seed_gives_identical_bytes() {
    let a = lab(&["simulate", "--figure", "6b", "--seeds", "5", "--seed", "42"]);
    let b = lab(&["simulate", "--figure", "6b", "--seeds", "5", "--seed", "42", "--jobs", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = lab(&["simulate", "--figure", "6b", "--seeds", "5", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_comes_from_the_environment() {
    let bin = env!("CARGO_BIN_EXE_time4-lab");
    let env = Command::new(bin).args(["video", "--runs", "3"]).env("TIME4_LAB_SEED", "9").output().unwrap();
    let flag = lab(&["video", "--runs", "3", "--seed", "9"]);
    assert_eq!(env.stdout, flag.stdout);
    assert!(stdout(&flag).lines().nth(1).unwrap().starts_with("0,9,"), "{}", stdout(&flag));
}

#[test]
fn out_writes_a_file_and_keeps_stdout_clean() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig7.csv");
    let out = lab(&["simulate", "--figure", "7", "--seeds", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("scenario,strategy,param,n,delta_ms"), "{text}");
    assert_eq!(text.lines().count(), 1 + 7 * 2 * 2);
}

#[test]
fn zero_jobs_is_a_usage_error() {
    assert_eq!(lab(&["simulate", "--figure", "6a", "--seeds", "1", "--jobs", "0"]).status.code(), Some(2));
}

#[test]
fn every_figure_preset_runs() {
    for fig in ["6a", "6b", "6c", "6d", "7", "8a", "8b"] {
        let out = lab(&["simulate", "--figure", fig, "--seeds", "2", "--summary"]);
        assert_eq!(out.status.code(), Some(0), "{fig}: {}", stderr(&out));
        assert!(stdout(&out).lines().count() > 2, "{fig}");
    }
}

#[test]
fn video_accepts_negative_injection() {
    let out = lab(&["video", "--runs", "5", "--sched-error", "0", "--inject", "-0.25ms"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let col = reader.headers().unwrap().iter().position(|h| h == "error_ms").unwrap();
    for rec in reader.records() {
        assert!((rec.unwrap()[col].parse::<f64>().unwrap() + 0.25).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn durations_parse_exactly(ns in 0i64..1_000_000_000_000) {
        prop_assert_eq!(parse_duration(&format!("{ns}ns")).unwrap(), ns);
        prop_assert_eq!(parse_duration(&format!("{}.{:06}ms", ns / 1_000_000, ns % 1_000_000)).unwrap(), ns);
        prop_assert_eq!(parse_duration(&format!("{}.{:09}s", ns / 1_000_000_000, ns % 1_000_000_000)).unwrap(), ns);
    }
}

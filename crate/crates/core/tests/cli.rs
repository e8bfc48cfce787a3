use std::path::Path;
use std::process::{Command, Output};

fn k3(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_k3twist"));
    cmd.args(args).env_remove("K3TWIST_CACHE");
    if let Some(c) = cache {
        cmd.env("K3TWIST_CACHE", c);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn exit_codes_per_command() {
    let cases: &[(&[&str], i32)] = &[
        (&["twist-rank", "5"], 0),
        (&["twist-rank", "1", "--height", "300"], 2),
        (&["twist-rank", "12"], 1),
        (&["twist-rank", "0"], 1),
        (&["spr", "-d", "3", "-a", "2", "-C", "5"], 0),
        (&["spr", "-d", "3", "-a", "2", "-C", "3", "--height", "300"], 2),
        (&["spr", "-d", "4", "-a", "2", "-C", "5"], 1),
        (&["atlas", "-d", "3", "-a", "2", "-C", "5", "--grid", "2x1"], 0),
        (&["atlas", "-d", "3", "-a", "2", "-C", "3", "--grid", "2x1", "--height", "300"], 2),
        (&["atlas", "-d", "3", "-a", "2", "-C", "5", "--grid", "0x1"], 1),
        (&["density", "-d", "3", "-a", "2", "-C", "5", "--grid", "2x1", "--interval", "-2,2"], 0),
        (&["density", "-d", "3", "-a", "2", "-C", "5", "--grid", "2x1", "--interval", "2,-2"], 1),
        (&["solubility", "-a", "1", "-C", "17"], 0),
        (&["solubility", "-a", "2", "-C", "3"], 2),
        (&["solubility", "-a", "2", "-C", "3", "--brute"], 0),
        (&["solubility", "-a", "1", "-C", "18"], 1),
        (&["root-number", "--d", "7", "--a", "1", "--sample", "5"], 0),
        (&["root-number", "--d", "7", "--a", "1"], 1),
        (&["descent", "-C", "17", "--height", "2000"], 0),
        (&["descent", "-C", "41", "--height", "50"], 2),
        (&["descent", "-C", "3"], 0),
        (&["--help"], 0),
        (&["--version"], 0),
        (&["frobnicate"], 1),
        (&["twist-rank", "5", "--height", "0"], 1),
    ];
    for (args, code) in cases {
        let out = k3(args, None);
        assert_eq!(out.status.code(), Some(*code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn twist_rank_schema() {
    let v = json(&k3(&["twist-rank", "15"], None));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["D"], 15);
    assert_eq!(v["verdict"], "certified");
    assert_eq!(v["witness"], serde_json::json!({"x": "-9", "y": "36"}));
    assert_eq!(v["provenance"]["kind"], "search_found");
    assert_eq!(v["root_number"], -1);
    assert!(v.get("expected_family").is_some());
}

#[test]
fn flagged_external_certificate() {
    let out = k3(&["spr", "-d", "7", "-a", "1", "-C", "17", "--height", "100", "--allow-external-facts"], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["uses_external_facts"], true);
    assert_eq!(v["curve_leg"]["witness"]["provenance"]["kind"], "external_fact");
    let out = k3(&["atlas", "-d", "7", "-a", "1", "-C", "17", "--grid", "2x1", "--height", "100", "--allow-external-facts"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_output() {
    let out = k3(&["root-number", "--d", "17", "--a", "1", "--t", "0,1/2,3", "--format", "csv"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T,fiber_class,root_number,unsupported");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(2) == Some("1")));
}

#[test]
fn warm_cache_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("points.json");
    for args in [
        &["twist-rank", "5"][..],
        &["twist-rank", "34"],
        &["spr", "-d", "3", "-a", "2", "-C", "5"],
        &["twist-rank", "15", "--format", "csv"],
    ] {
        let cold = k3(args, None);
        let first = k3(args, Some(&cache));
        let warm = k3(args, Some(&cache));
        assert_eq!(cold.stdout, first.stdout, "{args:?}");
        assert_eq!(first.stdout, warm.stdout, "{args:?}");
        assert_eq!(warm.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&cache).unwrap();
    assert!(text.contains("x3-x:5") && text.contains("x3-x:15"));
}

#[test]
fn corrupt_cache_entries_are_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("points.json");
    let bad = r#"{"schema_version": 1, "entries": {"x3-x:5": [{"point": {"x": "-4", "y": "7"}, "height_bound": 10}]}}"#;
    std::fs::write(&cache, bad).unwrap();
    let out = k3(&["twist-rank", "5", "--cache", cache.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(json(&out)["witness"], serde_json::json!({"x": "-4", "y": "6"}));
    let text = std::fs::read_to_string(&cache).unwrap();
    assert!(!text.contains("\"7\""));

    let out = k3(&["twist-rank", "5", "--no-cache"], Some(&cache));
    assert!(out.stderr.is_empty());
}

#[test]
fn svg_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("atlas.svg");
    let out = k3(&["atlas", "-d", "3", "-a", "2", "-C", "5", "--grid", "3x2", "--svg", svg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains(r#"version="1.1""#) && text.contains("<circle"));
    assert!(!text.contains("href"));
}

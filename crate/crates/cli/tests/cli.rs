//! End-to-end CLI behavior: exit codes, file outputs, event replay.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cbsopt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbsopt"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

const NET: &str = r#"
format_version = 1

[[node]]
id = "b1"
kind = "bridge"
[[node]]
id = "b2"
kind = "bridge"
[[node]]
id = "es1"
kind = "end-station"
[[node]]
id = "es2"
kind = "end-station"
[[node]]
id = "plc"
kind = "end-station"
plc = true

[[link]]
from = "es1"
to = "b1"
rate_bps = 1e9
queues = 2
[[link]]
from = "es2"
to = "b1"
rate_bps = 1e9
queues = 2
[[link]]
from = "b1"
to = "b2"
rate_bps = 1e9
queues = 2
[[link]]
from = "b2"
to = "plc"
rate_bps = 1e9
queues = 2

[[flow]]
id = "f1"
profile = 1
source = "es1"
destination = "plc"
kind = "static"

[[flow]]
id = "f2"
profile = 3
source = "es2"
destination = "plc"
kind = "static"
"#;

fn setup(dir: &Path) {
    fs::write(dir.join("net.toml"), NET).unwrap();
}

#[test]
fn optimize_writes_solution_report_trace_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    let out = cbsopt(
        &[
            "optimize",
            "--network",
            "net.toml",
            "--algorithm",
            "ga",
            "--population",
            "16",
            "--window",
            "5",
            "--max-iterations",
            "20",
            "--seed",
            "7",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for file in ["solution.toml", "report.json", "trace.csv", "manifest.json"] {
        assert!(tmp.path().join("run").join(file).exists(), "{file} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/report.json")).unwrap())
            .unwrap();
    assert!(report["f"].as_f64().unwrap() > 0.0);
}

#[test]
fn admit_replays_add_remove_add_identically() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    fs::write(
        tmp.path().join("sol.toml"),
        "format_version = 1\nmode = \"uniform\"\nbounds_us = [100, 1000]\n",
    )
    .unwrap();
    fs::write(
        tmp.path().join("events.toml"),
        r#"
format_version = 1

[[event]]
at = 0
action = "add"
flow = "d1"
profile = 2
source = "es1"
destination = "plc"

[[event]]
at = 1
action = "remove"
flow = "d1"

[[event]]
at = 2
action = "add"
flow = "d1"
profile = 2
source = "es1"
destination = "plc"
"#,
    )
    .unwrap();
    let out = cbsopt(
        &[
            "admit",
            "--network",
            "net.toml",
            "--solution",
            "sol.toml",
            "--events",
            "events.toml",
            "--out",
            "replay",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let decisions = fs::read_to_string(tmp.path().join("replay/decisions.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = decisions
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["verdict"], "accept");
    assert_eq!(lines[1]["verdict"], "remove");
    assert_eq!(lines[2]["verdict"], "accept");
    // the re-added flow gets the identical decision
    assert_eq!(lines[0]["path"], lines[2]["path"]);
    assert_eq!(lines[0]["queues"], lines[2]["queues"]);
    assert_eq!(lines[0]["d_p_us"], lines[2]["d_p_us"]);
}

#[test]
fn capacity_rejects_carry_a_reason() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    // 20 us bounds: a profile-5 burst needs more than the line rate
    fs::write(
        tmp.path().join("sol.toml"),
        "format_version = 1\nmode = \"uniform\"\nbounds_us = [20, 20]\n",
    )
    .unwrap();
    fs::write(
        tmp.path().join("events.toml"),
        r#"
format_version = 1

[[event]]
at = 0
action = "add"
flow = "d1"
profile = 5
source = "es1"
destination = "plc"
"#,
    )
    .unwrap();
    let out = cbsopt(
        &[
            "admit",
            "--network",
            "net.toml",
            "--solution",
            "sol.toml",
            "--events",
            "events.toml",
            "--out",
            "replay",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let decisions = fs::read_to_string(tmp.path().join("replay/decisions.jsonl")).unwrap();
    let record: serde_json::Value =
        serde_json::from_str(decisions.lines().next().unwrap()).unwrap();
    assert_eq!(record["verdict"], "reject");
    assert_eq!(record["reason"], "capacity-infeasible");
}

#[test]
fn parse_failures_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("net.toml"),
        "format_version = 1\n[[node]]\nid = 3\n",
    )
    .unwrap();
    let out = cbsopt(
        &[
            "optimize",
            "--network",
            "net.toml",
            "--algorithm",
            "ga",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    // validation failure: nine priority queues
    fs::write(
        tmp.path().join("net.toml"),
        NET.replace("queues = 2", "queues = 9"),
    )
    .unwrap();
    let out = cbsopt(
        &[
            "optimize",
            "--network",
            "net.toml",
            "--algorithm",
            "ga",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unsupported_combinations_exit_with_code_1() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    let out = cbsopt(
        &[
            "optimize",
            "--network",
            "net.toml",
            "--algorithm",
            "es",
            "--mode",
            "individual",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn intractable_es_exits_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    let out = cbsopt(
        &[
            "optimize",
            "--network",
            "net.toml",
            "--algorithm",
            "es",
            "--queues",
            "4",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("intractable"), "stderr: {stderr}");
}

#[test]
fn unknown_preset_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cbsopt(
        &["benchmark", "--preset", "bogus", "--out", "run"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn warm_started_algorithms_run_the_full_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    let out = cbsopt(
        &[
            "optimize",
            "--network",
            "net.toml",
            "--algorithm",
            "iga",
            "--population",
            "12",
            "--window",
            "4",
            "--max-iterations",
            "10",
            "--out",
            "warm",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = fs::read_to_string(tmp.path().join("warm/trace.csv")).unwrap();
    assert!(
        trace.contains("uniform"),
        "warm start records the uniform phase"
    );
    assert!(
        trace.contains("individual"),
        "warm start records the individual phase"
    );
    let solution = fs::read_to_string(tmp.path().join("warm/solution.toml")).unwrap();
    assert!(solution.contains("mode = \"individual\""));
}

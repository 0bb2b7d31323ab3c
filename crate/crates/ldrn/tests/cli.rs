//! End-to-end tests of the `ldrn` binary: artifact pipelines, exit codes,
//! and byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ldrn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ldrn")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json: {e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

const QUICKSTART_ARGS: [&str; 15] = [
    "gen",
    "--seed",
    "7",
    "--layers",
    "4",
    "--nodes",
    "1,2,2,2",
    "--dims",
    "2,3",
    "--density",
    "0.9",
    "--field",
    "2",
    "--dests",
    "2",
];

fn gen_quickstart(dir: &Path) -> PathBuf {
    let net = dir.join("net.json");
    let out = bin()
        .args(QUICKSTART_ARGS)
        .arg("--out")
        .arg(&net)
        .output()
        .expect("spawn ldrn");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    net
}

#[test]
fn gen_matches_committed_quickstart_file() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_quickstart(dir.path());
    let generated = std::fs::read(&net).unwrap();
    let committed =
        std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/quickstart.json"))
            .unwrap();
    assert_eq!(
        generated, committed,
        "gen output drifted from the quickstart file"
    );
    // And a second run is byte-identical.
    let net2 = dir.path().join("net2.json");
    let out = bin()
        .args(QUICKSTART_ARGS)
        .arg("--out")
        .arg(&net2)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(&net2).unwrap(), generated);
}

#[test]
fn capacity_reports_min_cuts() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_quickstart(dir.path());
    let out = run(&["capacity", net.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["multicast_capacity"], 2);
    assert_eq!(v["per_destination"].as_array().unwrap().len(), 2);
    // Worker count must not change the result.
    let threaded = run(&["--jobs", "4", "capacity", net.to_str().unwrap()]);
    assert_eq!(stdout_json(&threaded), v);
}

#[test]
fn flow_succeeds_then_verifies_and_infeasible_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_quickstart(dir.path());
    let flow = dir.path().join("flow.json");
    let out = run(&[
        "flow",
        net.to_str().unwrap(),
        "--dest",
        "1",
        "--rate",
        "2",
        "--out",
        flow.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let verify = run(&["verify", net.to_str().unwrap(), flow.to_str().unwrap()]);
    assert!(
        verify.status.success(),
        "{}",
        String::from_utf8_lossy(&verify.stderr)
    );

    let infeasible = run(&["flow", net.to_str().unwrap(), "--dest", "1", "--rate", "9"]);
    assert_eq!(infeasible.status.code(), Some(1));
}

#[test]
fn code_pipeline_with_auto_lift_sweeps_clean() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_quickstart(dir.path());
    let code = dir.path().join("code.json");
    let transcript = dir.path().join("transcript.json");
    // GF(2) with two destinations forces the auto-lift to GF(4).
    let built = run(&[
        "code",
        net.to_str().unwrap(),
        "--mode",
        "det",
        "--rounds",
        "auto",
        "--out",
        code.to_str().unwrap(),
        "--transcript",
        transcript.to_str().unwrap(),
    ]);
    assert!(
        built.status.success(),
        "{}",
        String::from_utf8_lossy(&built.stderr)
    );
    let summary = stdout_json(&built);
    assert_eq!(summary["rounds"], 2);
    assert_eq!(summary["field"]["k"], 2);
    assert!(transcript.exists());

    let sweep = run(&[
        "simulate",
        net.to_str().unwrap(),
        code.to_str().unwrap(),
        "--sweep",
    ]);
    assert!(sweep.status.success());
    let v = stdout_json(&sweep);
    assert_eq!(v["summary"], "all messages decoded at all destinations");

    let verify = run(&["verify", net.to_str().unwrap(), code.to_str().unwrap()]);
    assert!(verify.status.success());
}

#[test]
fn tampered_code_fails_verification_naming_the_destination() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_quickstart(dir.path());
    let code = dir.path().join("code.json");
    let built = run(&[
        "code",
        net.to_str().unwrap(),
        "--rounds",
        "auto",
        "--out",
        code.to_str().unwrap(),
    ]);
    assert!(built.status.success());

    // Flip one local-encoding entry at the source node.
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(&code).unwrap()).unwrap();
    let entry = &mut v["nodes"][0][0][0][0];
    *entry = serde_json::json!((entry.as_u64().unwrap() + 1) % 4);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&v).unwrap()).unwrap();

    let verify = run(&["verify", net.to_str().unwrap(), tampered.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(1));
    let report = stdout_json(&verify);
    assert_eq!(report["ok"], false);
    let failed: Vec<String> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["ok"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert!(
        failed.iter().any(|name| name.contains("destination")),
        "failures should name a destination: {failed:?}"
    );

    let sim = run(&[
        "simulate",
        net.to_str().unwrap(),
        tampered.to_str().unwrap(),
        "--sweep",
    ]);
    assert_eq!(sim.status.code(), Some(1));
}

#[test]
fn randomized_mode_is_seed_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_quickstart(dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "code",
            net.to_str().unwrap(),
            "--mode",
            "rand",
            "--seed",
            "11",
            "--rounds",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let missing = run(&["capacity", "no-such-file.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let net = gen_quickstart(dir.path());
    let bad_dest = run(&["flow", net.to_str().unwrap(), "--dest", "9", "--rate", "1"]);
    assert_eq!(bad_dest.status.code(), Some(2));

    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, b"{\"layers\": []}").unwrap();
    let parse = run(&["capacity", bad_json.to_str().unwrap()]);
    assert_eq!(parse.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&parse.stderr);
    assert!(
        stderr.contains("field"),
        "error should name the missing key: {stderr}"
    );

    let clap = bin().arg("nonsense").output().unwrap();
    assert_eq!(clap.status.code(), Some(2));
}

#[test]
fn adequate_extension_field_needs_no_lift() {
    // GF(4) already exceeds g = 2, so --rounds auto must leave it alone.
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("gf4.json");
    let out = bin()
        .args([
            "gen",
            "--seed",
            "3",
            "--layers",
            "3",
            "--nodes",
            "1,2,2",
            "--dims",
            "2,3",
            "--density",
            "0.9",
            "--field",
            "2,2",
            "--dests",
            "2",
            "--out",
        ])
        .arg(&net)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let code = dir.path().join("code.json");
    let built = run(&[
        "code",
        net.to_str().unwrap(),
        "--rounds",
        "auto",
        "--out",
        code.to_str().unwrap(),
    ]);
    assert!(
        built.status.success(),
        "{}",
        String::from_utf8_lossy(&built.stderr)
    );
    let summary = stdout_json(&built);
    assert_eq!(summary["rounds"], 1);
    assert_eq!(summary["field"]["k"], 2);
    let verify = run(&["verify", net.to_str().unwrap(), code.to_str().unwrap()]);
    assert!(verify.status.success());
}

#[test]
fn zero_density_reports_zero_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("zero.json");
    let out = bin()
        .args([
            "gen",
            "--seed",
            "1",
            "--layers",
            "3",
            "--nodes",
            "1,2,1",
            "--dims",
            "2",
            "--density",
            "0",
            "--field",
            "3",
            "--dests",
            "1",
            "--out",
        ])
        .arg(&net)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["multicast_capacity"], 0);
}

#[test]
fn simulate_single_message_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_quickstart(dir.path());
    let code = dir.path().join("code.json");
    run(&[
        "code",
        net.to_str().unwrap(),
        "--rounds",
        "auto",
        "--out",
        code.to_str().unwrap(),
    ]);
    let out = run(&[
        "simulate",
        net.to_str().unwrap(),
        code.to_str().unwrap(),
        "--message",
        "3,1",
    ]);
    assert!(out.status.success());
    let trace = stdout_json(&out);
    for dest in trace["destinations"].as_array().unwrap() {
        assert_eq!(dest["ok"], true);
        assert_eq!(dest["decoded"], serde_json::json!([3, 1]));
    }
}

//! Runs the `radoncs` binary as a user would.

use std::path::Path;
use std::process::{Command, Output};

fn radoncs(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radoncs"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn synth_sense_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--n1", "24", "--n2", "24", "--pulses", "2", "--seed", "5"];
    ok(&radoncs(dir.path(), &[&["synth"], &grid[..]].concat()));
    assert!(dir.path().join("field.csv").exists());
    ok(&radoncs(dir.path(), &[&["sense", "--angles", "3"], &grid[..]].concat()));
    assert!(dir.path().join("measurements.json").exists());
    ok(&radoncs(dir.path(), &[&["reconstruct", "--angles", "3"], &grid[..]].concat()));
    let recon: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("recon.json")).unwrap()).unwrap();
    assert!(recon["sse"].as_f64().unwrap() < 1e-9);
}

#[test]
fn gather_and_rip() {
    let dir = tempfile::tempdir().unwrap();
    let o = radoncs(dir.path(), &["gather", "--n1", "7", "--n2", "7", "--pulses", "1", "--angles", "4", "--verbose"]);
    ok(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains("t=  0"));
    assert!(dir.path().join("schedule.jsonl").exists());
    ok(&radoncs(dir.path(), &["rip", "--n1", "16", "--n2", "16", "--pulses", "2", "--trials", "200"]));
    assert!(dir.path().join("rip.json").exists());
}

#[test]
fn compare_and_preset_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[schemes]\nsweep_sides = [33]\n").unwrap();
    let out = dir.path().join("cmp");
    let o = Command::new(env!("CARGO_BIN_EXE_radoncs"))
        .args(["compare", "--preset", "fig8_energy", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    ok(&o);
    assert!(std::fs::read_to_string(out.join("summary.csv")).unwrap().contains("1089"));

    let custom = dir.path().join("custom.toml");
    std::fs::write(
        &custom,
        "seeds = [1]\n[field]\nn1 = 16\nn2 = 16\npulse_count = 1\n[sensing]\nangle_sets = [[\"0\", \"pi/2\"]]\n",
    )
    .unwrap();
    let out = dir.path().join("custom");
    let o = Command::new(env!("CARGO_BIN_EXE_radoncs"))
        .args(["preset", "custom", "--config"])
        .arg(&custom)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    ok(&o);
    assert!(out.join("runs.jsonl").exists());
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let o = radoncs(dir.path(), &["preset", "no_such_preset"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[field]\nbogus = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_radoncs"))
        .args(["preset", "table1", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!o.status.success());
}

//! End-to-end runs of the `risuav` binary on a tiny budget.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn risuav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risuav")).args(args).env_remove("RISUAV_SEED").output().unwrap()
}

fn ok(out: &Output) -> String {
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(out.status.success(), "stdout:\n{stdout}\nstderr:\n{}", String::from_utf8_lossy(&out.stderr));
    stdout
}

fn train(dir: &Path, seed: &str) -> String {
    let smoke = configs().join("smoke.toml");
    let agent = configs().join("agent_quick.toml");
    ok(&risuav(&[
        "train",
        "--config",
        smoke.to_str().unwrap(),
        "--agent-config",
        agent.to_str().unwrap(),
        "--generations",
        "3",
        "--seed",
        seed,
        "--out",
        dir.to_str().unwrap(),
    ]))
}

#[test]
fn train_eval_baseline_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = train(dir.path(), "3");
    assert!(stdout.contains("greedy AoI"), "{stdout}");
    for f in ["log.csv", "checkpoint.json", "eval.csv", "trace.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let log = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    assert_eq!(log.lines().count(), 4, "header plus one row per generation");

    let eval_dir = dir.path().join("eval");
    let ck = dir.path().join("checkpoint.json");
    let out = ok(&risuav(&[
        "eval",
        "--checkpoint",
        ck.to_str().unwrap(),
        "--episodes",
        "2",
        "--out",
        eval_dir.to_str().unwrap(),
    ]));
    assert!(out.contains("AoI"), "{out}");

    ok(&risuav(&["baseline", "--smoke", "--episodes", "2", "--out", dir.path().to_str().unwrap()]));
    let plots = ok(&risuav(&["plot", "--out", dir.path().to_str().unwrap()]));
    for f in ["curve_reward.svg", "curve_aoi.svg", "bars_aoi.svg", "bars_energy.svg", "trajectory.svg"] {
        assert!(dir.path().join(f).exists(), "missing {f}; plot printed:\n{plots}");
    }
}

#[test]
fn same_seed_same_log() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    train(a.path(), "8");
    train(b.path(), "8");
    let read = |d: &Path| std::fs::read(d.join("log.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn sweep_writes_aggregate_and_cells() {
    let dir = tempfile::tempdir().unwrap();
    let agent = configs().join("agent_quick.toml");
    ok(&risuav(&[
        "sweep",
        "--smoke",
        "--agent-config",
        agent.to_str().unwrap(),
        "--generations",
        "2",
        "--param",
        "e_max",
        "--values",
        "2e-6,8e-6",
        "--repetitions",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    let rows = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let cells = std::fs::read_to_string(dir.path().join("sweep_cells.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert_eq!(cells.lines().count(), 5);
}

#[test]
fn bad_config_fails_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[channel]\nnoise = \"loud\"\n").unwrap();
    let out = risuav(&["baseline", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("noise") || err.contains("loud"), "{err}");
}

#[test]
fn unknown_variant_is_a_usage_error() {
    let out = risuav(&["train", "--variant", "AO-XYZ", "--smoke"]);
    assert!(!out.status.success());
}

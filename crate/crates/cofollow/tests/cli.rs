mod common;

use std::process::Command;

use common::crate_dir;
use tempfile::tempdir;

fn cofollow() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cofollow"));
    c.current_dir(crate_dir());
    c
}

fn code(c: &mut Command) -> (i32, String) {
    let out = c.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn run_then_stage_commands_succeed() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (c, err) = code(cofollow().args(["--config", "fixtures/fixture.conf", "--out", out, "run"]));
    assert_eq!(c, 0, "{err}");
    assert!(dir.path().join("manifest.json").exists());
    for cmd in ["metrics", "export-dot", "report"] {
        let (c, err) = code(cofollow().args(["--config", "fixtures/fixture.conf", "--out", out, cmd]));
        assert_eq!(c, 0, "{cmd}: {err}");
    }
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(cofollow().arg("--no-such-flag")).0, 1);
    assert_eq!(code(&mut cofollow()).0, 1);
    assert_eq!(code(cofollow().args(["--set", "threshold=0", "graph"])).0, 1);
    assert_eq!(code(cofollow().args(["--set", "colour=blue", "graph"])).0, 1);
    assert_eq!(code(cofollow().args(["--set", "noequals", "graph"])).0, 1);
    assert_eq!(code(cofollow().args(["--config", "fixtures/fixture.conf", "--normalization", "cosine", "run"])).0, 1);
    assert_eq!(code(cofollow().arg("--help")).0, 0);
}

#[test]
fn data_errors_exit_2() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (c, err) = code(cofollow().args(["--config", "fixtures/fixture.conf", "--out", out, "--followers", "missing.jsonl", "run"]));
    assert_eq!(c, 2);
    assert!(err.contains("projection: input not found"), "{err}");
    let (c, err) = code(cofollow().args(["--config", "fixtures/fixture.conf", "--out", out, "communities"]));
    assert_eq!(c, 2);
    assert!(err.contains("cofollow graph"), "{err}");
}

#[test]
fn numerical_errors_exit_3() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (c, err) = code(cofollow().args([
        "--config",
        "fixtures/fixture.conf",
        "--out",
        out,
        "--set",
        "eigen_max_iter=1",
        "--set",
        "eigen_tol=1e-300",
        "run",
    ]));
    assert_eq!(c, 3, "{err}");
    assert!(err.contains("metrics:"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let out = cofollow()
        .args(["--config", "fixtures/fixture.conf", "--seed", "9", "--set", "alpha=0.05", "show-config"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 9\n"), "{text}");
    assert!(text.contains("alpha = 0.05\n"));
    assert!(text.contains("truncation = 100\n"));
}

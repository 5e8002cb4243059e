//! End-to-end checks of the compiled binary: exit codes, artifact
//! emission, and output determinism.

use fuzzy_pendulum::cli::{parse_csv, CSV_HEADER};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fuzzy-pendulum"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn run_in(dir: &Path, config_text: &str, extra: &[&str]) -> Output {
    let config = write_config(dir, config_text);
    bin()
        .current_dir(dir)
        .arg("run")
        .arg(&config)
        .args(extra)
        .output()
        .unwrap()
}

const SHORT: &str = "[sim]\nt_end = 1\n";

#[test]
fn successful_run_emits_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), SHORT, &[]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("rms_final_window"), "{stdout}");
    let art = dir.path().join("out");
    for name in [
        "trajectory.csv",
        "tracking.svg",
        "error.svg",
        "control.svg",
        "theta.svg",
        "metrics.txt",
    ] {
        assert!(art.join(name).exists(), "missing {name}");
    }
    let csv = std::fs::read_to_string(art.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with(CSV_HEADER));
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), 1001);
    assert_eq!(rows[0].t, 0.0);
    assert_eq!(rows[0].x[3], 0.2);
}

#[test]
fn compare_flag_writes_both_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), SHORT, &["--compare"]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("adaptive final-window RMS < classical:"), "{stdout}");
    let art = dir.path().join("out");
    assert!(art.join("trajectory_classical.csv").exists());
    assert!(art.join("trajectory_adaptive.csv").exists());
    assert!(!art.join("trajectory.csv").exists());
}

#[test]
fn preset_override_and_fixed_matrix_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "[sim]\nt_end = 2\n", &["--preset", "paper"]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("not symmetric positive definite"),
        "{stdout}"
    );
}

#[test]
fn out_dir_flag_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), SHORT, &["--out", "flagged"]);
    assert!(out.status.success());
    assert!(dir.path().join("flagged/trajectory.csv").exists());

    let config = write_config(dir.path(), SHORT);
    let out = bin()
        .current_dir(dir.path())
        .env("FUZZY_PENDULUM_OUT", "from_env")
        .arg("run")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from_env/trajectory.csv").exists());
}

#[test]
fn identical_runs_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), SHORT, &["--out", "a"]).status.success());
    assert!(run_in(dir.path(), SHORT, &["--out", "b"]).status.success());
    for name in ["trajectory.csv", "tracking.svg", "error.svg", "control.svg", "theta.svg"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();

    // 2: argument errors (unknown preset name).
    let out = run_in(dir.path(), SHORT, &["--preset", "wild"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // 3: config syntax/key errors, with a line number on stderr.
    let out = run_in(dir.path(), "[sim]\nd_t = 0.01\n", &[]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "{stderr}");

    // 4: semantically invalid scenario.
    let out = run_in(dir.path(), "[sim]\ndt = -1\n", &[]);
    assert_eq!(out.status.code(), Some(4));

    // 5: controller construction failure (quoted gains are not Hurwitz).
    let cfg = "[controller]\ntype = adaptive\npreset = paper\np_mode = solved\n";
    let out = run_in(dir.path(), cfg, &[]);
    assert_eq!(out.status.code(), Some(5));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("not Hurwitz"), "{stderr}");
    assert!(stderr.contains("1.3018"), "{stderr}");

    // 6: divergence (rest start walks the stable preset out of its box),
    // with the partial trajectory still on disk.
    let cfg = "[controller]\ntype = adaptive\n[sim]\ninitial_state = 0 0 0 0\n";
    let out = run_in(dir.path(), cfg, &["--out", "diverged"]);
    assert_eq!(out.status.code(), Some(6));
    assert!(dir.path().join("diverged/trajectory.csv").exists());
    assert!(dir.path().join("diverged/metrics.txt").exists());

    // 7: unwritable output target.
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, "file, not a directory").unwrap();
    let out = run_in(dir.path(), SHORT, &["--out", "blocked"]);
    assert_eq!(out.status.code(), Some(7));

    // Missing config file is an i/o error too.
    let out = bin()
        .current_dir(dir.path())
        .args(["run", "no_such_file.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn selftest_passes_and_prints_verdicts() {
    let out = bin().args(["selftest", "--seed", "7"]).output().unwrap();
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.matches(": PASS").count(), 8, "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn help_lists_defaults() {
    let out = bin().args(["run", "--help"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[default: out]"), "{stdout}");
    assert!(stdout.contains("FUZZY_PENDULUM_OUT"), "{stdout}");
    assert!(stdout.contains("dt = 0.001"), "{stdout}");
}

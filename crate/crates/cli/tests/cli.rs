//! End-to-end checks of the binary: spawn it against the shipped configs,
//! inspect exit codes, stderr, and the CSV files it leaves behind.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_layerlab"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(mode: &str, config: &Path, out: &Path, seed: Option<u64>) -> Output {
    let mut cmd = bin();
    cmd.arg(mode).arg("--config").arg(config).arg("--out").arg(out);
    if let Some(s) = seed {
        cmd.arg("--seed").arg(s.to_string());
    }
    cmd.output().expect("binary spawns")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn assert_rectangular(csv: &str, cols: usize) {
    let mut lines = csv.lines();
    let header = lines.next().expect("header");
    assert_eq!(header.split(',').count(), cols);
    let mut rows = 0;
    for line in lines {
        assert_eq!(line.split(',').count(), cols, "ragged row: {line}");
        rows += 1;
    }
    assert!(rows > 0, "empty table");
    assert!(!csv.contains('\r'), "CRLF leaked into output");
}

#[test]
fn pareto_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("pareto", &repo_config("dess.json"), dir.path(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("pareto:"), "summary line missing: {stdout}");
    assert_rectangular(&read(dir.path(), "sigma_table.csv"), 7);
    assert_rectangular(&read(dir.path(), "pareto.csv"), 3);
    assert_rectangular(&read(dir.path(), "lqr_pareto.csv"), 3);
}

#[test]
fn reruns_are_byte_identical_and_seeds_matter() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    assert!(run("pareto", &repo_config("dess.json"), a.path(), None).status.success());
    assert!(run("pareto", &repo_config("dess.json"), b.path(), None).status.success());
    assert!(run("pareto", &repo_config("dess.json"), c.path(), Some(7)).status.success());
    for name in ["sigma_table.csv", "pareto.csv", "lqr_pareto.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name} drifted");
    }
    assert_ne!(
        read(a.path(), "sigma_table.csv"),
        read(c.path(), "sigma_table.csv"),
        "--seed had no effect"
    );
}

#[test]
fn simulate_logs_a_complete_mission() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("simulate", &repo_config("gridworld.json"), dir.path(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("completed=true"), "{stdout}");
    assert!(stdout.contains("trace_satisfied=true"), "{stdout}");
    let log = read(dir.path(), "runlog.csv");
    assert_rectangular(&log, 13);
    // 1 kHz logging for a sub-40 s mission.
    assert!(log.lines().count() > 10_000);
}

#[test]
fn sensorimotor_tables_cover_the_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("sensorimotor", &repo_config("sensorimotor.json"), dir.path(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_rectangular(&read(dir.path(), "kradeoff.csv"), 4);
    let transition = read(dir.path(), "phasetransition.csv");
    assert_rectangular(&transition, 7);
    assert_eq!(transition.lines().count(), 52, "0..=50 plus a header");
    assert_rectangular(&read(dir.path(), "vision.csv"), 2);
}

#[test]
fn bode_reports_bands_and_sensitivities() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("bode", &repo_config("bode.json"), dir.path(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(dir.path(), "bode_report.csv");
    assert_rectangular(&report, 11);
    assert_eq!(report.lines().count(), 12, "config band plus ten random bands");
    assert_rectangular(&read(dir.path(), "sensitivity.csv"), 3);
}

#[test]
fn unknown_subcommand_exits_two() {
    let out = bin().arg("warp").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mode_subcommand_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("bode", &repo_config("dess.json"), dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mode"), "{stderr}");
}

#[test]
fn config_violations_name_the_field() {
    let dir = tempfile::tempdir().unwrap();

    let bad_dt = dir.path().join("bad_dt.json");
    let text = std::fs::read_to_string(repo_config("gridworld.json")).unwrap();
    std::fs::write(&bad_dt, text.replace("\"dt\": 0.001", "\"dt\": 0.3")).unwrap();
    let out = run("simulate", &bad_dt, dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulate.dt"));

    let bad_k = dir.path().join("bad_k.json");
    let text = std::fs::read_to_string(repo_config("dess.json")).unwrap();
    std::fs::write(&bad_k, text.replace("\"sweep_k\": 2", "\"sweep_k\": 9")).unwrap();
    let out = run("pareto", &bad_k, dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pareto.sweep_k"));

    let unknown = dir.path().join("unknown.json");
    let text = std::fs::read_to_string(repo_config("bode.json")).unwrap();
    std::fs::write(&unknown, text.replace("\"pole\": 1.0", "\"pole\": 1.0, \"spin\": 3")).unwrap();
    let out = run("bode", &unknown, dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spin"));
}

#[test]
fn missing_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("pareto", &dir.path().join("nope.json"), dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
}

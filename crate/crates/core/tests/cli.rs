//! End-to-end runs of the `cobound` binary.

use std::path::Path;
use std::process::{Command, Output};

fn cobound(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cobound"))
        .args(args)
        .env("COBOUND_OUTPUT_DIR", dir)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn cobound")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn passing_checks_exit_zero_and_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = cobound(
        dir.path(),
        &["--cocycle", "zero", "verify", "--check", "kernel_rotation", "--check", "i_flow"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS kernel_rotation")));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify/i_flow.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(dir.path().join("verify/summary.json").exists());
}

#[test]
fn planted_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = cobound(
        dir.path(),
        &["--cocycle", "zero", "--negative-control", "verify", "--check", "kernel_rotation"],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL kernel_rotation"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&cobound(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&cobound(dir.path(), &["--cocycle", "no_such_cocycle", "kernels"])), 2);
    assert_eq!(code(&cobound(dir.path(), &["--guard", "-1", "kernels"])), 2);
    assert_eq!(
        code(&cobound(dir.path(), &["--cocycle", "zero", "verify", "--check", "no_such_check"])),
        2
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&cobound(dir.path(), &["--config", missing.to_str().unwrap(), "kernels"])), 2);
    assert_eq!(code(&cobound(dir.path(), &["--help"])), 0);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let o = cobound(
            dir.path(),
            &[
                "--cocycle",
                "cup_orientation",
                "--check-grid",
                "65",
                "--threads",
                threads,
                "solve",
                "--grid",
                "12",
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let o = cobound(
            dir.path(),
            &[
                "--cocycle",
                "cup_orientation",
                "--check-grid",
                "65",
                "--threads",
                threads,
                "kernels",
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["f0_grid.csv", "kernel_table.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between thread counts");
    }
}

#[test]
fn solve_reads_points_and_tuples() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("points.txt");
    std::fs::write(&points, "# comment\n1.0, 4.5\n2.0 1.0\n0.1,1.2,2.5,4.0\n").unwrap();
    let o = cobound(dir.path(), &["--cocycle", "zero", "solve", "--points", points.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("solve.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with(",ok")), "{csv}");
}

#[test]
fn figures_write_their_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = cobound(dir.path(), &["--cocycle", "zero", "figures", "--orbits", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["orbits_a.csv", "orbits_n.csv", "path.csv", "domain.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

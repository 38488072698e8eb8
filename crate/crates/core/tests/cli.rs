use std::fs;
use std::path::Path;
use std::process::Command;

use qg2::bench::Manifest;
use qg2::cli::{self, ENSTROPHY_CSV, MANIFEST};
use qg2::grid::ScalarField;
use qg2::timeloop::read_series_csv;

fn qg2() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qg2"))
}

fn write_config(dir: &Path, out: &Path, t_end: f64, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.ini");
    let text = format!(
        "case = case1\nmesh = 16x32\nfilter = nonlinear\nt_end = {t_end}\noutput = {}\n\
         [output]\nwindow_start = 0.01\nwindow_end = 0.04\nenstrophy_stride = 0.005\n{extra}",
        out.display()
    );
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_a_complete_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), &out, 0.04, "snapshot_times = 0.02\n");
    let status = qg2().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let m = Manifest::load(&out.join(MANIFEST)).unwrap();
    assert_eq!(m.get("case"), Some("case1"));
    assert_eq!(m.get("mesh"), Some("16x32"));
    assert_eq!(m.get("filter"), Some("nonlinear"));
    assert_eq!(m.get("steps"), Some("1600"));
    assert!(m.get("wall_clock_seconds").is_some());
    for f in m.get("averaged_fields").unwrap().split(',') {
        let (field, _) = ScalarField::load(&out.join(f)).unwrap();
        assert_eq!(field.grid().nx(), 16);
    }
    let series = read_series_csv(&out.join(m.get("enstrophy_csv").unwrap())).unwrap();
    assert_eq!(series.len(), 9);
    assert!((series[0].1 - 2.0 / 3.0).abs() < 1e-2);
    assert!(out.join("snapshots/t0.020000/q1.fld").exists());
    assert!(out.join("final/psi2.fld").exists());
    let echo = fs::read_to_string(out.join(cli::CONFIG_ECHO)).unwrap();
    assert!(qg2::config::parse_config(&echo).is_ok());
}

#[test]
fn resume_continues_bit_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    let part = tmp.path().join("part");
    let cfg = write_config(tmp.path(), &full, 0.04, "checkpoint_interval = 0.02\n");
    assert!(qg2().args(["run", "--config"]).arg(&cfg).status().unwrap().success());
    let cfg = write_config(tmp.path(), &part, 0.02, "checkpoint_interval = 0.02\n");
    assert!(qg2().args(["run", "--config"]).arg(&cfg).status().unwrap().success());
    let out = qg2().arg("resume").arg(&part).args(["--t-end", "0.04"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [ENSTROPHY_CSV, "avg_q1.fld", "avg_psi2.fld", "final/q2.fld", "final/qbar1.fld"] {
        assert_eq!(fs::read(full.join(f)).unwrap(), fs::read(part.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.ini");
    fs::write(&bad, "case = case1\n[physics]\ndelta = 1.5\n").unwrap();
    let out = qg2().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta must lie in (0,1)"));

    fs::write(&bad, "case = case1\nalpa = 0.1\n").unwrap();
    let out = qg2().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpa"));

    let out = qg2().args(["run", "--config"]).arg(tmp.path().join("missing.ini")).output().unwrap();
    assert_eq!(out.status.code(), Some(5));

    let out = qg2().arg("resume").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(5));

    let help = qg2().arg("--help").output().unwrap();
    assert!(String::from_utf8_lossy(&help.stdout).contains("3  a linear solve did not converge"));
}

#[test]
fn verify_writes_reports_and_gates() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qg2()
        .args(["verify", "--case", "ro1-re10", "--meshes", "8,16", "--t-end", "0.05", "--output"])
        .arg(tmp.path())
        .output()
        .unwrap();
    // Meshes this coarse are far from the published errors: the gate fails.
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("gate: FAIL"), "{stdout}");
    let csv = fs::read_to_string(tmp.path().join("ro1-re10/convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("mesh_size,var,error,rate"));
    assert_eq!(lines.count(), 8);
    let report = fs::read_to_string(tmp.path().join("ro1-re10/report.txt")).unwrap();
    assert!(report.contains("psi1") && report.contains("1/16"));

    let out = qg2()
        .args(["verify", "--no-gate", "--case", "ro1-re10", "--meshes", "8,16", "--t-end", "0.05", "--output"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = qg2().args(["verify", "--case", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_reads_csvs_and_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    fs::write(&a, "t,E1,E2\n0,1,2\n1,3,4\n2,5,6\n").unwrap();
    let out = qg2()
        .arg("stats")
        .arg(&a)
        .args(["--window-start", "1", "--window-end", "2", "--reference"])
        .arg(&a)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("4.00E+00") && text.contains("0.00E+00"), "{text}");

    let out = qg2().arg("stats").arg(&a).args(["--window-start", "5", "--window-end", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

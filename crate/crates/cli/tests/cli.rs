use std::path::Path;
use std::process::{Command, Output};

use secbf_core::experiment::strip_timing;
use secbf_core::SystemConfig;

fn secbf(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_secbf"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "secbf {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn single_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let first = String::from_utf8(secbf(dir.path(), &["single", "--seed", "11"]).stdout).unwrap();
    let second = String::from_utf8(secbf(dir.path(), &["single", "--seed", "11"]).stdout).unwrap();
    assert_eq!(strip_timing(&first), strip_timing(&second));
    for section in ["[config]", "[channels]", "[initialization]", "[iterations]", "[rank profiles]", "[recovery]", "[audit]", "[zero forcing]"] {
        assert!(first.contains(section), "missing {section}");
    }
    assert!(first.contains("audit pass"));
    let saved = std::fs::read_to_string(dir.path().join("single_seed11.txt")).unwrap();
    assert_eq!(saved, second);
}

#[test]
fn zero_interference_tolerance_reports_infeasible_init() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SystemConfig::reference();
    cfg.mu_threshold_mw = vec![0.0; cfg.macro_users];
    let path = dir.path().join("eta0.toml");
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    let out = secbf(dir.path(), &["single", "--seed", "0", "--config", path.to_str().unwrap()]);
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("status init-infeasible"), "{report}");
}

#[test]
fn converge_with_zero_trials_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    secbf(dir.path(), &["converge", "--trials", "0", "--pmax-dbm", "30"]);
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv, "pmax_dbm,trial,iteration,objective\n");
}

#[test]
fn plot_of_empty_csv_succeeds_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    secbf(dir.path(), &["converge", "--trials", "0"]);
    let out = secbf(dir.path(), &["plot"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no data rows"));
    for f in ["convergence.svg", "convergence.gp", "convergence.dat"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn sweep_writes_both_schemes() {
    let dir = tempfile::tempdir().unwrap();
    secbf(dir.path(), &["sweep", "--trials", "1", "--varpi-mw", "0.5,1000"]);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "varpi_mw,trial,scheme,feasible,objective,min_harvested_mw,max_mu_interference_mw");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].contains(",proposed,") && lines[2].contains(",zf,"));
    assert!(lines[3].contains(",proposed,false,") && lines[4].contains(",zf,false,"));
    assert!(dir.path().join("sweep_summary.csv").exists());
}

#[test]
fn unknown_plot_schema_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n1,2\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_secbf"))
        .args(["plot", bad.to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!status.status.success());
}

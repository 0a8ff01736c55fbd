use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quatsig_core::{load_series_csv, read_pattern_csv, LearningCurve};

fn quatsig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quatsig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn report_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("report.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("{key} missing from report"))
        .to_string()
}

#[test]
fn gradcheck_defaults_pass_and_report_is_stable() {
    let a = quatsig(&["gradcheck", "--seed", "7"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = quatsig(&["gradcheck", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("checks_passed: 21/21"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&quatsig(&["gradcheck", "--trials", "0"])), 2);
    assert_eq!(code(&quatsig(&["gradcheck", "--h0", "-1"])), 2);
    assert_eq!(code(&quatsig(&["gradcheck", "--bogus"])), 2);
    assert_eq!(code(&quatsig(&["predict"])), 2);
    assert_eq!(code(&quatsig(&["beamform", "--runs", "0"])), 2);
    assert_eq!(code(&quatsig(&["beamform", "--sensors", "0"])), 2);
}

#[test]
fn missing_input_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.csv");
    let o = quatsig(&["predict", "--input", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
}

#[test]
fn predict_outputs_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("synth");
    let o = quatsig(&[
        "predict",
        "--synth",
        "--samples",
        "2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "series.csv",
        "curve_qlms.csv",
        "curve_aqlms.csv",
        "predictions.csv",
        "report.txt",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let series = load_series_csv(&out.join("series.csv")).unwrap();
    assert_eq!(series.len(), 2000);
    let curve = LearningCurve::read_csv(&out.join("curve_qlms.csv")).unwrap();
    let steps: usize = report_value(&out, "steps").parse().unwrap();
    assert_eq!(curve.len(), steps);
    assert!(curve.rows.windows(2).all(|w| w[0].n < w[1].n));
    assert!(curve.rows.iter().all(|r| r.inst_cost >= 0.0));

    let pred = fs::read_to_string(out.join("predictions.csv")).unwrap();
    let mut lines = pred.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,target_vx,target_vy,target_vz,qlms_vx,qlms_vy,qlms_vz,aqlms_vx,aqlms_vy,aqlms_vz"
    );
    assert_eq!(lines.count(), steps);

    // The file input path reproduces the synthetic run on its own output.
    let again = tmp.path().join("file");
    let o = quatsig(&[
        "predict",
        "--input",
        out.join("series.csv").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g1: f64 = report_value(&out, "gain_qlms_db").parse().unwrap();
    let g2: f64 = report_value(&again, "gain_qlms_db").parse().unwrap();
    assert!((g1 - g2).abs() < 1e-3);
}

#[test]
fn zero_step_size_gives_zero_gain() {
    let tmp = tempfile::tempdir().unwrap();
    let o = quatsig(&[
        "predict",
        "--synth",
        "--samples",
        "1000",
        "--mu",
        "0",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(report_value(tmp.path(), "gain_qlms_db"), "0.0000");
    assert_eq!(report_value(tmp.path(), "gain_aqlms_db"), "0.0000");
}

#[test]
fn single_algorithm_writes_one_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let o = quatsig(&[
        "predict",
        "--synth",
        "--samples",
        "1000",
        "--algo",
        "aqlms",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(tmp.path().join("curve_aqlms.csv").exists());
    assert!(!tmp.path().join("curve_qlms.csv").exists());
}

#[test]
fn empty_beamform_run_is_not_converged() {
    let tmp = tempfile::tempdir().unwrap();
    let o = quatsig(&[
        "beamform",
        "--runs",
        "1",
        "--snapshots",
        "0",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report_value(tmp.path(), "converged"), "false");
    let curve = LearningCurve::read_csv(&tmp.path().join("curve_beamform.csv")).unwrap();
    assert!(curve.is_empty());
}

#[test]
fn beamform_outputs_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let o = quatsig(&[
        "beamform",
        "--runs",
        "2",
        "--snapshots",
        "5000",
        "--mu",
        "2e-5",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pattern = read_pattern_csv(&tmp.path().join("beampattern.csv")).unwrap();
    assert_eq!(pattern.len(), 2 * 181);
    let curve = LearningCurve::read_csv(&tmp.path().join("curve_beamform.csv")).unwrap();
    assert_eq!(curve.len(), 5000);
    let text = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(text.contains("null_depth_30deg_db: "));
    assert!(text.contains("null_depth_-20deg_db: "));
    assert!(text.contains("wall_clock_s: "));
    for line in text.lines().filter(|l| l.starts_with("file: ")) {
        assert!(Path::new(&line[6..]).exists(), "{line}");
    }
}

#[test]
fn divergence_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = quatsig(&[
        "beamform",
        "--runs",
        "1",
        "--snapshots",
        "2000",
        "--mu",
        "1",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(
        &cfg,
        "# scenario\nsynth = true\nsamples = 1500\nlen = 8\nmu = 1e-3\n",
    )
    .unwrap();
    let out = tmp.path().join("o");
    let o = quatsig(&[
        "predict",
        "--config",
        cfg.to_str().unwrap(),
        "--len",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report_value(&out, "len"), "4");
    assert_eq!(report_value(&out, "mu"), "0.001");
    assert_eq!(report_value(&out, "samples"), "1500");
    assert_eq!(report_value(&out, "step"), "2");

    fs::write(&cfg, "unknown = 1\n").unwrap();
    assert_eq!(
        code(&quatsig(&["gradcheck", "--config", cfg.to_str().unwrap()])),
        2
    );
}

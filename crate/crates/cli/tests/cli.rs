use std::path::Path;
use std::process::{Command, Output};

fn cellmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellmix")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn meta(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap()
}

#[test]
fn coeffs_reports_published_point_and_mutation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cellmix(&["coeffs", "--out", out]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("feasible: true"));
    assert!(s.contains("tight: 2z2 >= 1+x2+y2 (982 = 982)"));
    let o = cellmix(&["coeffs", "--out", out, "--assignment", "256,384,488,492,384,480,493,472,491"]);
    let s = stdout(&o);
    assert!(s.contains("feasible: false"));
    assert!(s.contains("violated: x1 >= 1+y0 (384 < 385)"));
    assert_eq!(meta(dir.path())["command"], "coeffs");
}

#[test]
fn coeffs_minimize() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellmix(&["coeffs", "--minimize", "max", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("minimiser"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("coeffs.json")).unwrap()).unwrap();
    assert!(v["minimum"]["report"]["feasible"].as_bool().unwrap());
}

#[test]
fn simulate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# pure diffusion\ngrid.n = 32\nkappa = 0.05\ndt = 0.02\nt_final = 4\nflow.kind = still\ntheta0 = sine\nrecord_every = 5\nrealizations = 2\nfit.t0 = 0\n",
    )
    .unwrap();
    let out = dir.path().join("sim");
    let o = cellmix(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["series.csv", "fits.csv", "averaged.csv", "meta.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let m = meta(&out);
    assert_eq!(m["config"]["base"]["seed"], 9);
    assert_eq!(m["seeds"].as_array().unwrap().len(), 2);

    let fit_out = dir.path().join("fit");
    let o = cellmix(&[
        "fit",
        "--input",
        out.join("series.csv").to_str().unwrap(),
        "--column",
        "l2",
        "--window",
        "0,4",
        "--realization",
        "1",
        "--out",
        fit_out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((f["rate"].as_f64().unwrap() - 0.05).abs() < 5e-4);
    assert!(fit_out.join("fit.json").exists());
}

#[test]
fn verify_coeffs_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellmix(&["verify", "--suite", "coeffs", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(dir.path().join("coeffs.json").exists());
    assert_eq!(meta(dir.path())["config"]["suite"], "coeffs");
}

#[test]
fn correlate_still_flow() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "flow.kind = still\nn_max = 3\nrealizations = 2\nnq = 16\n").unwrap();
    let o = cellmix(&["correlate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("gamma 0.000000"));
    let rows = csv::Reader::from_path(dir.path().join("correlations.csv")).unwrap().records().count();
    assert_eq!(rows, 8);
}

#[test]
fn bad_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kappa = -1\n").unwrap();
    let o = cellmix(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa"));
    let o = cellmix(&["simulate", "--config", "/nonexistent/file.cfg"]);
    assert!(!o.status.success());
}

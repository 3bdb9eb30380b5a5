use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn caloric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caloric")).args(args).output().expect("spawn caloric")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn extend_examples() {
    for (input, expected) in [("x^2", "1/3*x^2 + 2/3*t"), ("t", "1/3*x^2 + 2/3*t"), ("5", "5")] {
        let o = caloric(&["extend", input]);
        assert_eq!(o.status.code(), Some(0), "{input}");
        let out = stdout(&o);
        assert!(out.contains(&format!("u_p = {expected}\n")), "{out}");
        assert_eq!(out.matches("PASS").count(), 2);
    }
}

#[test]
fn extend_reports_parse_positions_and_dimension() {
    let o = caloric(&["extend", "x + * t"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 4"));
    let o = caloric(&["extend", "x3*t", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = caloric(&["extend", "x3*t"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn extend_writes_its_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ext");
    let o = caloric(&["extend", "x1*x2^2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["config"]["dim"], 2);
    assert_eq!(report["heat_vanishes"], true);
    let text = std::fs::read_to_string(out.join("extension.txt")).unwrap();
    assert_eq!(text.trim(), report["u"].as_str().unwrap());
}

#[test]
fn bowl_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("quadratic");
    let o = caloric(&["bowl", "--data", "x^2+2*t", "--bottom", "0,0", "--opening", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&out.join("report.json"));
    assert!(report["epsilon"].as_f64().unwrap() < 1e-12);
    assert_eq!(report["config"]["data"], "x^2+2*t");
    assert!(std::fs::read_to_string(out.join("residuals.csv")).unwrap().starts_with("x1,t,data,solution,error\n"));

    let o = caloric(&["bowl", "--data", "1", "--bottom", "-0.5,2", "--opening", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("u = 1\n"));
}

#[test]
fn bowl_reports_unmet_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("abs");
    let o = caloric(&["bowl", "--data", "abs(x)", "--tol", "1e-8", "--max-degree", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["tolerance_met"], false);
    assert!(report["epsilon"].as_f64().unwrap() > 1e-8);
    let rows = std::fs::read_to_string(out.join("residuals.csv")).unwrap();
    assert!(rows.lines().count() > 10);

    let o = caloric(&["bowl", "--data", "abs(x)", "--degree", "4", "--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(1));
    let o = caloric(&["bowl", "--data", "abs(x)", "--degree", "4"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bowl_rejects_bad_input() {
    assert_eq!(caloric(&["bowl", "--data", "x2", "--bottom", "0,0"]).status.code(), Some(2));
    assert_eq!(caloric(&["bowl", "--data", "x", "--bottom", "0,0", "--dim", "2"]).status.code(), Some(2));
    assert_eq!(caloric(&["bowl", "--data", "x", "--opening", "-1"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("norm");
    let o = caloric(&["verify", "normalization", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["passed"], true);
    assert!(report["worst"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["config"]["resolution"]["levels"], 36);

    let o = caloric(&["verify", "mean-value", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("extension of"));

    let o = caloric(&["verify", "normalization", "--resolution", "coarse", "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(caloric(&["verify", "bogus"]).status.code(), Some(2));
    assert_eq!(caloric(&["verify", "reproduction", "--dim", "2"]).status.code(), Some(2));
}

#[test]
fn verify_reproduction_reports_both_kernels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("repro");
    let o = caloric(&["verify", "reproduction", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("printed kernel"));
    let report = read_json(&out.join("report.json"));
    assert!(report["worst"].as_f64().unwrap() <= 1e-6);
    assert!(report["printed_residual"].as_f64().unwrap() > 1e-2);
    let rows = std::fs::read_to_string(out.join("reproduction.csv")).unwrap();
    assert!(rows.contains(",derived,") && rows.contains(",printed,"));
}

#[test]
fn verify_supercaloric() {
    let o = caloric(&["verify", "supercaloric"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("PASS").count(), 4);
}

#[test]
fn perron_rectangle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rect");
    let o = caloric(&["perron", data("rectangle.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["converged"], true);
    assert_eq!(report["sandwich"], true);
    assert!(report["max_gap"].as_f64().unwrap() <= 2e-6);
    assert_eq!(report["config"]["sweep"]["opening"], 0.3);
    assert_eq!(report["config"]["domain"]["nodes"], serde_json::json!([41, 41]));
    for f in ["upper.csv", "lower.csv", "trace.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn perron_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = caloric(&["perron", data("rectangle.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["report.json", "upper.csv", "lower.csv", "trace.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn perron_constant_data_settles_at_once() {
    let o = caloric(&["perron", data("constant.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sweeps 1 upper / 1 lower"));
}

#[test]
fn perron_failures() {
    let o = caloric(&["perron", data("thin.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no interior bowls"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("starved");
    let o = caloric(&["perron", data("starved.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(read_json(&out.join("report.json"))["converged"], false);
    assert!(out.join("upper.csv").exists());

    assert_eq!(caloric(&["perron", data("rectangle.toml").to_str().unwrap(), "--dim", "2"]).status.code(), Some(2));
    assert_eq!(caloric(&["perron", "missing.toml"]).status.code(), Some(2));
}

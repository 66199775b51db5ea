use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orbitgeo"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn horizontal2_is_exactly_parallel() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "h2.json",
        r#"{"n": 4, "mu": {"2,1": 1.5, "4,3": 0.7}, "base": [2,1], "family": "horizontal2",
            "t1": 6.0, "steps": 121, "coeffs": {"2,1": 1.0, "4,3": -0.5}}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["family"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(&out.join("summary.json"));
    assert!(s["max_horizontal_residual"].as_f64().unwrap() <= 1e-10);
    assert!(s["max_sasaki_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(s["pass"], true);
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x_2_1,x_3_1,x_3_2,x_4_1,x_4_2,x_4_3\n"));
    assert_eq!(csv.lines().count(), 122);
}

#[test]
fn oblique_scalar_grid() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "ob.json",
        r#"{"n": 3, "mu": 2.0, "base": [2,1], "family": "oblique", "t0": 0, "t1": 1,
            "steps": 1001, "x0": 0.3, "v0": 1.2}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["family"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 1001);
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("1.0000000000000000e0,"));
    let s = json(&out.join("summary.json"));
    assert!(s["max_sasaki_residual"].as_f64().unwrap() <= 1e-7);
    assert_eq!(s["details"]["kind"], "scalar");
}

#[test]
fn oblique_system_and_tolerance_failure() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "sys.json",
        r#"{"n": 4, "mu": {"2,1": 1.5, "4,3": 0.7}, "base": [2,1], "family": "oblique",
            "t1": 1, "steps": 101, "x0": {"2,1": 0.3, "4,3": -0.2}, "v0": {"2,1": 0.5, "4,3": 0.8}}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["family"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(&out.join("summary.json"));
    assert!(s["max_oblique_residual"].as_f64().unwrap() <= 1e-7);
    assert_eq!(s["max_horizontal_residual"], Value::Null);

    let o = run(
        &["family", "--tol", "1e-18"],
        &cfg,
        &tmp.path().join("strict"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&tmp.path().join("strict/summary.json"))["pass"], false);
}

#[test]
fn horizontal1_every_regime() {
    let tmp = TempDir::new().unwrap();
    for (base, s, regime) in [
        ([3, 1], 2, "between"),
        ([3, 2], 1, "below"),
        ([2, 1], 4, "above"),
    ] {
        let cfg = write(
            tmp.path(),
            "h1.json",
            &format!(
                r#"{{"n": 4, "mu": {{"2,1": 1.5, "3,1": 2.0, "4,2": 0.6}}, "base": [{}, {}],
                    "family": "horizontal1", "t1": 12.0, "steps": 301, "s": {s},
                    "regime": "{regime}", "a": 1.0, "b": -0.5}}"#,
                base[0], base[1]
            ),
        );
        let out = tmp.path().join(regime);
        let o = run(&["family"], &cfg, &out);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let sum = json(&out.join("summary.json"));
        assert_eq!(sum["details"]["regime"], regime);
        assert!(sum["max_horizontal_residual"].as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn input_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let bad = write(tmp.path(), "bad.json", r#"{"n": 3, "mu": "#);
    let o = run(&["family"], &bad, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot parse"));

    let wrong = write(
        tmp.path(),
        "wrong.json",
        r#"{"n": 4, "base": [3,1], "family": "horizontal1", "t1": 1, "steps": 11,
            "s": 2, "regime": "above", "a": 1, "b": 0}"#,
    );
    let o = run(&["family"], &wrong, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("between"));

    let missing = tmp.path().join("nope.json");
    assert_eq!(run(&["family"], &missing, &out).status.code(), Some(2));

    let unknown = write(
        tmp.path(),
        "unknown.json",
        r#"{"n": 3, "base": [2,1], "family": "horizontal2", "t1": 1, "steps": 11, "coef": {}}"#,
    );
    assert_eq!(run(&["family"], &unknown, &out).status.code(), Some(2));
}

#[test]
fn metric_file_is_resolved_next_to_config() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "metric.json", r#"{"n": 3, "mu": {"2,1": 2.0}}"#);
    let cfg = write(
        tmp.path(),
        "cfg.json",
        r#"{"n": 3, "metric_file": "metric.json", "base": [2,1], "family": "horizontal2",
            "t1": 1, "steps": 11, "coeffs": {"2,1": 1.0}}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["family"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&out.join("summary.json"))["mu"]["2,1"], 2.0);
}

#[test]
fn hyperboloid_cases() {
    let tmp = TempDir::new().unwrap();
    for (abc, case) in [
        ("0, 1, 2", "horizontal"),
        ("1, 0, 0", "vertical"),
        ("1, 1, 0", "oblique"),
    ] {
        let v: Vec<&str> = abc.split(", ").collect();
        let cfg = write(
            tmp.path(),
            "h.json",
            &format!(
                r#"{{"a": {}, "b": {}, "c": {}, "mu": 1.0, "t0": -3, "t1": 3, "steps": 61, "mesh": {{"n_u": 16, "n_v": 5}}}}"#,
                v[0], v[1], v[2]
            ),
        );
        let out = tmp.path().join(case);
        let o = run(&["hyperboloid"], &cfg, &out);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let meta = json(&out.join("metadata.json"));
        assert_eq!(meta["case"], case);
        assert!(meta["max_line_defect"].as_f64().unwrap() <= 1e-10);
        assert!(meta["chart_boundary"]["note"]
            .as_str()
            .unwrap()
            .contains("seam"));
        let curve = fs::read_to_string(out.join("curve.csv")).unwrap();
        assert_eq!(curve.lines().next(), Some("t,x,y,z"));
        for line in curve.lines().skip(1) {
            let p: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((p[1] * p[1] + p[2] * p[2] - p[3] * p[3] - 1.0).abs() < 1e-12);
            if case == "horizontal" {
                assert_eq!(p[3], 2.0);
            }
        }
        let obj = fs::read_to_string(out.join("hyperboloid.obj")).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 80);
    }
    let degenerate = write(
        tmp.path(),
        "d.json",
        r#"{"a": 0, "b": 0, "c": 1, "t1": 1, "steps": 5}"#,
    );
    assert_eq!(
        run(&["hyperboloid"], &degenerate, &tmp.path().join("d"))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn curvature_reports() {
    let tmp = TempDir::new().unwrap();
    let eq = write(tmp.path(), "eq.json", r#"{"n": 3, "mu": 1.0}"#);
    let out = tmp.path().join("eq");
    let o = run(&["curvature"], &eq, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("curvature.json"));
    assert_eq!(r["equal_mu"], true);
    for p in r["planes"].as_array().unwrap() {
        assert!((p["k"].as_f64().unwrap() - 0.25).abs() <= 1e-9);
    }

    let generic = write(
        tmp.path(),
        "g.json",
        r#"{"n": 3, "mu": {"2,1": 1, "3,1": 2, "3,2": 3}}"#,
    );
    let out = tmp.path().join("g");
    assert_eq!(run(&["curvature"], &generic, &out).status.code(), Some(0));
    let r = json(&out.join("curvature.json"));
    assert!(r["bianchi_max"].as_f64().unwrap() <= 1e-10);
    assert!(r["planes"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["k"].is_f64()));

    let abelian = write(tmp.path(), "two.json", r#"{"n": 2}"#);
    let o = run(&["curvature"], &abelian, &tmp.path().join("two"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("abelian so(2)") || stderr(&o).contains("so(2) is abelian"));

    let o = bin()
        .arg("curvature")
        .arg("--config")
        .arg(&eq)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["n"], 3);
}

#[test]
fn outputs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "sys.json",
        r#"{"n": 4, "mu": {"2,1": 1.5, "4,3": 0.7}, "base": [2,1], "family": "oblique",
            "t1": 1, "steps": 51, "x0": {"2,1": 0.3, "4,3": -0.2}, "v0": {"2,1": 0.5, "4,3": 0.8}}"#,
    );
    let mut dirs = Vec::new();
    for threads in ["1", "4"] {
        let out = tmp.path().join(format!("t{threads}"));
        let o = bin()
            .env("ORBITGEO_THREADS", threads)
            .args(["family", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        dirs.push(out);
    }
    for name in ["trajectory.csv", "summary.json"] {
        assert_eq!(
            fs::read(dirs[0].join(name)).unwrap(),
            fs::read(dirs[1].join(name)).unwrap()
        );
    }

    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("check{threads}"));
        let o = bin()
            .env("ORBITGEO_THREADS", threads)
            .args(["check", "--seed", "11", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        reports.push(fs::read(out.join("check.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn bad_thread_count_is_input_error() {
    let o = bin()
        .env("ORBITGEO_THREADS", "0")
        .arg("check")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

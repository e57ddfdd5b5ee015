use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cqhj::{Complex64, PathKind, PathStatus, TrajectoryPath};

fn cqhj(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cqhj"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn summary(out: &Output) -> serde_json::Value {
    let stdout = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {stdout}"))
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const SMALL_FIELDS: &str = r#""fields": {
    "real": {"x": {"min": -10, "max": 10, "n": 21}, "nt": 9},
    "argand": {"re": {"min": -3, "max": 3, "n": 13}, "im": {"min": -1, "max": 1, "n": 5}},
    "continuity": {"x": {"min": -10, "max": 10, "n": 21}, "nt": 9}
}"#;

#[test]
fn fields_default_times_give_four_argand_files_per_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{{ {SMALL_FIELDS} }}");
    let out = cqhj(&["fields", "--time", "0,2,4,8"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert_eq!(s["command"], "fields");
    for field in ["psibar_mod", "psibar_phase", "vbar_mod", "vbar_phase"] {
        for t in ["0", "2", "4", "8"] {
            let p = dir.path().join(format!("out/argand_{field}_t{t}.csv"));
            assert!(p.exists(), "{}", p.display());
        }
    }
    for field in ["rho", "S", "v", "Q"] {
        assert!(dir.path().join(format!("out/real_{field}.csv")).exists());
    }
    assert!(dir.path().join("out/continuity_residual.csv").exists());
}

#[test]
fn empty_packet_list_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqhj(&["fields"], Some(r#"{"packets": []}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("packets"));
}

#[test]
fn field_level_messages() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"packets": [{"a": 0, "v0": 1, "sigma0": -1}], "hbar": 0}"#;
    let out = cqhj(&["trajectories"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("packets[0].sigma0") && err.contains("hbar"), "{err}");

    let out = cqhj(&["fields"], Some(r#"{"mass": 1}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mass"));
}

#[test]
fn single_packet_fields_are_nodeless() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{ "packets": [{{"a": -2, "v0": 1, "sigma0": 1}}], {SMALL_FIELDS} }}"#);
    let out = cqhj(&["fields"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(0));
    for name in ["argand_vbar_phase_t4.csv", "real_v.csv"] {
        assert!(rows(&dir.path().join("out").join(name)).iter().all(|r| r[3] == "0"));
    }
}

#[test]
fn zero_horizon_writes_initial_samples_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqhj(&["trajectories"], Some(r#"{"horizon": 0}"#), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let real = rows(&dir.path().join("out/trajectories_real.csv"));
    assert_eq!(real.len(), 18);
    assert!(real.iter().all(|r| r[1] == "0.0000000000000000e0" && r[4] == "completed"));
}

#[test]
fn complex_launches_share_one_file_with_member_ids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"horizon": 1, "trajectories": {"real_launches": [-4, -2],
        "complex_launches": [[-6, 0.5], [-6, -0.5], [5, 1]]}}"#;
    let out = cqhj(&["trajectories"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&dir.path().join("out/trajectories_complex.csv"));
    let mut ids: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    ids.dedup();
    assert_eq!(ids, ["0", "1", "2"]);
    assert_eq!(summary(&out)["summary"]["non_crossing"], true);
}

#[test]
fn isochrone_files_per_crossing_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"isochrones": {"launches": [-8, -4, 4, 8]}}"#;
    let out = cqhj(&["isochrones", "--tc", "0,2,4,8"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for t in ["0", "2", "4", "8"] {
        assert!(dir.path().join(format!("out/isochrone_tc{t}.csv")).exists());
    }
    // The t_c = 0 family starts on the real launch points.
    let starts: Vec<(f64, f64)> = rows(&dir.path().join("out/isochrone_tc0.csv"))
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() == 0.0)
        .map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    assert_eq!(starts, vec![(-8.0, 0.0), (-4.0, 0.0), (4.0, 0.0), (8.0, 0.0)]);
    for fam in summary(&out)["summary"]["families"].as_array().unwrap() {
        assert!(fam["max_residual"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn crossing_time_beyond_horizon_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqhj(&["isochrones", "--tc", "9"], None, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("isochrones.t_c[0]"));
}

#[test]
fn singular_reports_node_positions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"isochrones": {"launches": [-8, -6, -4, -2], "t_c": [4]}}"#;
    let out = cqhj(&["singular", "--time", "2,4"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let nodes = rows(&dir.path().join("out/nodes.csv"));
    let at = |t: f64| -> Vec<f64> {
        nodes
            .iter()
            .filter(|r| r[0].parse::<f64>().unwrap() == t)
            .map(|r| r[2].parse().unwrap())
            .collect()
    };
    assert_eq!(at(4.0).len(), 4);
    assert!(at(4.0).iter().all(|im| im.abs() < 1e-8));
    assert!(!at(2.0).is_empty());
    assert!(at(2.0).iter().all(|im| im.abs() > 1e-3));
    assert!(dir.path().join("out/caustics_tc4.csv").exists());
    assert!(dir.path().join("out/loops_tc4.csv").exists());
}

#[test]
fn single_packet_reports_are_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"packets": [{"a": -2, "v0": 0, "sigma0": 1}]}"#;
    let out = cqhj(&["singular"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let files = summary(&out)["files"].as_array().unwrap().clone();
    assert_eq!(files.len(), 9);
    for f in files {
        let text = fs::read_to_string(dir.path().join("out").join(f.as_str().unwrap())).unwrap();
        assert_eq!(text.lines().count(), 1, "{f}");
    }

    // A moving packet is still nodeless and loop-free.
    let cfg = r#"{"packets": [{"a": -2, "v0": 1, "sigma0": 1}], "isochrones": {"t_c": [2]}}"#;
    let out = cqhj(&["singular"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&dir.path().join("out/nodes.csv")).len(), 0);
    assert_eq!(rows(&dir.path().join("out/loops_tc2.csv")).len(), 0);
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cqhj"))
        .args(["trajectories", "--config"])
        .arg({
            let p = dir.path().join("c.json");
            fs::write(&p, r#"{"horizon": 1}"#).unwrap();
            p
        })
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("CQHJ_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cqhj"))
        .args(["trajectories", "--out"])
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn path(samples: &[(f64, f64)]) -> TrajectoryPath {
    TrajectoryPath {
        kind: PathKind::Real,
        samples: samples.iter().map(|&(t, x)| (t, Complex64::new(x, 0.0))).collect(),
        t0: samples[0].0,
        t1: samples.last().unwrap().0,
        status: PathStatus::Completed,
        initial: Complex64::new(samples[0].1, 0.0),
        stats: Default::default(),
    }
}

#[test]
fn crossing_real_trajectories_are_detected() {
    let a = path(&[(0.0, -2.0), (1.0, -1.0), (2.0, -0.5)]);
    let b = path(&[(0.0, -1.0), (1.0, -0.8), (2.0, -0.6)]);
    assert!(cqhj_cli::check_non_crossing(&[-2.0, -1.0], &[a.clone(), b.clone()]).is_err());
    let c = path(&[(0.0, -1.0), (1.0, -0.2), (2.0, -0.1)]);
    assert!(cqhj_cli::check_non_crossing(&[-2.0, -1.0], &[a, c]).is_ok());
}

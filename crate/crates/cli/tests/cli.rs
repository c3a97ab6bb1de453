//! Drives the `flapsim` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn flapsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flapsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--output-dir", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    flapsim(&all)
}

fn summary(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn scenario_names() -> Vec<String> {
    let out = flapsim(&["list-scenarios"]);
    assert!(out.status.success());
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect()
}

#[test]
fn lists_unique_scenarios() {
    let mut names = scenario_names();
    assert!(names.len() >= 6, "{names:?}");
    let n = names.len();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), n);
}

#[test]
fn every_builtin_runs() {
    let dir = tempfile::tempdir().unwrap();
    for name in scenario_names() {
        let out = run_in(dir.path(), &["run", &name]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(dir.path().join(format!("{name}.json")).exists(), "{name}");
        assert!(dir.path().join(format!("{name}.csv")).exists(), "{name}");
    }
}

#[test]
fn stroke_design_point_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["simulate", "fig2-stroke"]).status.success());
    let s = summary(dir.path(), "fig2-stroke");
    let a = s["steady_amplitude_rad"].as_f64().unwrap();
    let target = std::f64::consts::FRAC_PI_3;
    assert!((a - target).abs() <= 0.10 * target, "{a}");
    assert_eq!(s["settled"], Value::Bool(true));
    assert!(s["settle_time_s"].as_f64().is_some());
}

#[test]
fn pitch_design_point_metrics() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["simulate", "pitch-design-point"]).status.success());
    let s = summary(dir.path(), "pitch-design-point");
    let a = s["steady_amplitude_rad"].as_f64().unwrap();
    let target = std::f64::consts::FRAC_PI_4;
    assert!((a - target).abs() <= 0.20 * target, "{a}");
    let aero = s["peak_aerodynamic_torque_n_m"].as_f64().unwrap();
    assert!((aero - 2.5e-6).abs() <= 0.10 * 2.5e-6, "{aero}");
    // unsettled runs report no settle time
    if s["settled"] == Value::Bool(false) {
        assert!(s["settle_time_s"].is_null());
    }
}

#[test]
fn trajectory_row_count_matches_sampling() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["run", "fig2-stroke"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("fig2-stroke.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,angle_rad,rate_rad_s"));
    // 100 cycles at 200 samples per cycle: t_end / dt_out = 20000
    assert_eq!(lines.count(), 20000 + 1);
    let s = summary(dir.path(), "fig2-stroke");
    assert_eq!(s["samples"].as_u64(), Some(20001));
}

#[test]
fn pitch_trajectory_has_torque_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["run", "pitch-design-point"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("pitch-design-point.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("t,angle_rad,rate_rad_s,spring_torque_n_m,aerodynamic_torque_n_m,centripetal_torque_n_m")
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for name in ["fig2-stroke", "resonance-sweep", "pivot-table1"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(run_in(a.path(), &["run", name]).status.success());
        assert!(run_in(b.path(), &["run", name]).status.success());
        for ext in ["csv", "json"] {
            let file = format!("{name}.{ext}");
            let x = std::fs::read(a.path().join(&file)).unwrap();
            let y = std::fs::read(b.path().join(&file)).unwrap();
            assert!(x == y, "{file} differs between runs");
        }
    }
}

#[test]
fn empty_config_exits_one_with_json_issues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    std::fs::write(&cfg, "").unwrap();
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    assert!(!err["issues"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_parameters_name_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        "[scenario]\nmodel = stroke\nmode = simulate\n[params]\nm_r = -2 mg\nL = 0 mm\nk_t = 20 uNm\nL_w = 4.4 mm\nz_max = 0.8 mm\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    let keys: Vec<&str> = err["issues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["key"].as_str().unwrap())
        .collect();
    assert!(keys.contains(&"params.m_r") && keys.contains(&"params.L"), "{keys:?}");
}

#[test]
fn blow_up_exits_two_and_names_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.cfg");
    std::fs::write(
        &cfg,
        "[scenario]\nmodel = stroke\nmode = simulate\n[params]\nm_r = 2 mg\nL = 2.5 mm\nk_t = 20 uNm\nL_w = 4.4 mm\nz_max = 0.8 mm\n\
         [integration]\nsteps_per_period = 1\nsamples_per_period = 1\ncycles = 1000\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "blow-up");
    assert!(err["message"].as_str().unwrap().contains("t = "));
}

#[test]
fn mode_mismatch_is_a_config_error() {
    let out = flapsim(&["sweep", "fig2-stroke"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["issues"].as_array().unwrap().len(), 1);
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in scenario_names() {
        let first = flapsim(&["--dump-config", "run", &name]);
        assert!(first.status.success(), "{name}");
        let path = dir.path().join(format!("{name}.cfg"));
        std::fs::write(&path, &first.stdout).unwrap();
        let second = flapsim(&["--dump-config", "run", path.to_str().unwrap()]);
        assert!(second.status.success(), "{name}");
        assert_eq!(first.stdout, second.stdout, "{name}");
    }
}

#[test]
fn dumped_config_reproduces_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let dump = flapsim(&["--dump-config", "run", "pivot-table1"]);
    let path = a.path().join("dumped.cfg");
    std::fs::write(&path, &dump.stdout).unwrap();
    assert!(run_in(a.path(), &["run", "pivot-table1"]).status.success());
    assert!(run_in(b.path(), &["run", path.to_str().unwrap()]).status.success());
    assert_eq!(
        std::fs::read(a.path().join("pivot-table1.json")).unwrap(),
        std::fs::read(b.path().join("pivot-table1.json")).unwrap()
    );
}

#[test]
fn seedless_is_rejected() {
    let out = flapsim(&["--seedless", "run", "fig2-stroke"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_scenario_is_a_config_error() {
    let out = flapsim(&["run", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(1));
}

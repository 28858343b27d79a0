use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn latticeport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latticeport")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small honeycomb window that keeps a transport run to a few seconds.
const SMALL: &str = r#"
[transport]
lattice = "honeycomb"
distance_x_lx = 40.0
t_f_tx = 8.0

[transport.grid]
n_x = 48
n_y = 48
periods_x = 1
periods_y = 1
"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn presets_listing() {
    let out = latticeport(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("honeycomb,200,600,200,")));
    assert!(text.lines().any(|l| l.starts_with("square,0,200,200,")));
    let checkerboard = text.lines().find(|l| l.starts_with("checkerboard")).unwrap();
    assert!(checkerboard.ends_with("experimental: no confining ω_x at θ=0"));
}

#[test]
fn trajectory_velocity_vanishes_at_the_ends() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = latticeport(&["trajectory", "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows[0][2], 0.0);
    assert_eq!(rows[rows.len() - 1][2], 0.0);
    assert_eq!(rows[rows.len() - 1][0], 10.0);

    let aom = fs::read_to_string(out_dir.join("aom.csv")).unwrap();
    assert!(aom.starts_with("t_in_Tx,delta_f_times_Tx\n"));
    assert!(out_dir.join("trajectory.toml").exists());
}

#[test]
fn corrupt_config_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "bad.toml", "[transport]\nlattice = \"honeycomb\"\ndistance = [1,\n");
    let out_dir = dir.path().join("out");
    let out = latticeport(&["transport", "--config", &config, "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error kind=config:"));
    assert!(!out_dir.exists());

    let unknown = write_config(&dir, "unknown.toml", "[transport]\nlattice = \"honeycomb\"\nspeed = 3\n");
    assert_eq!(latticeport(&["sweep", "--config", &unknown, "--out", path(&out_dir)]).status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let unstable = write_config(&dir, "cb.toml", "[transport]\nlattice = \"checkerboard\"\n");
    let out = latticeport(&["ground-state", "--config", &unstable, "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error kind=physics:"));

    let starved = format!("{SMALL}\n[transport.stepper]\nrel_tol = 1e-14\nmax_halvings = 1\n");
    let starved = write_config(&dir, "starved.toml", &starved);
    let out = latticeport(&["transport", "--config", &starved, "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!out_dir.exists());
}

#[test]
fn runs_are_deterministic_and_sidecars_round_trip() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "small.toml", SMALL);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for out in [&a, &b] {
        let run = latticeport(&["transport", "--config", &config, "--out", path(out), "--jobs", "1"]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let first = fs::read(a.join("transport.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("transport.csv")).unwrap());

    // the sidecar is a complete config: feeding it back reproduces the run
    let sidecar = a.join("transport.toml");
    let run = latticeport(&["transport", "--config", path(&sidecar), "--out", path(&c)]);
    assert!(run.status.success());
    assert_eq!(first, fs::read(c.join("transport.csv")).unwrap());
    assert_eq!(
        body(&fs::read_to_string(&sidecar).unwrap()),
        body(&fs::read_to_string(c.join("transport.toml")).unwrap())
    );
}

#[test]
fn overrides_reach_the_sidecar() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let run = latticeport(&["trajectory", "--grid", "64x32", "--tol", "1e-5", "--out", path(&out_dir)]);
    assert!(run.status.success());
    let sidecar = fs::read_to_string(out_dir.join("trajectory.toml")).unwrap();
    assert!(sidecar.contains("n_x = 64") && sidecar.contains("n_y = 32"));
    assert!(sidecar.contains("rel_tol = 0.00001"));
    assert_eq!(latticeport(&["trajectory", "--grid", "64", "--out", path(&out_dir)]).status.code(), Some(2));
}

#[test]
fn figure_panel_writes_curve_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let run = latticeport(&["figure", "--fig", "5", "--panel", "a", "--distance", "100", "--grid", "64x64", "--out", path(&out_dir)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let curve = fs::read_to_string(out_dir.join("figure5a_d100.csv")).unwrap();
    assert!(curve.starts_with("t_f_over_Tx,fidelity,d_actual_x,d_actual_y,max_accel,E_initial,E_final,n_steps\n"));
    assert_eq!(curve.lines().count(), 17);
    assert!(out_dir.join("figure5a_d100.toml").exists());
    assert_eq!(latticeport(&["figure", "--fig", "9", "--panel", "a", "--out", path(&out_dir)]).status.code(), Some(2));
}

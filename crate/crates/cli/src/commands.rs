//! Subcommand bodies. Each returns its files as in-memory artifacts so that
//! nothing is written unless the whole run succeeds.

use std::time::{SystemTime, UNIX_EPOCH};

use latticeport::experiment::{snap_distance, write_robustness, write_sweep};
use latticeport::output::{write_field, write_potential, write_rows};
use latticeport::units::{to_recoil, RECOIL_ENERGY};
use latticeport::{
    aom_program, breakdown_time, fidelity_curve, figure_config, harmonic_approximation, preset, robustness_sweep,
    sweep_tf, trajectory_2d, LatticeKind, SweepPoint, TransportSetup, TransportSpec,
};

use crate::config::{Overrides, RunConfig};
use crate::error::CliError;

pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

#[derive(Default)]
pub struct Report {
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<String>,
}

impl Report {
    fn file(&mut self, name: impl Into<String>, contents: Vec<u8>) {
        self.artifacts.push(Artifact { name: name.into(), contents });
    }

    fn csv<F>(&mut self, name: &str, write: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> latticeport::Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.file(name, buf);
        Ok(())
    }

    fn sidecar(&mut self, stem: &str, command: &str, config: &RunConfig) -> Result<(), CliError> {
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let text = format!(
            "# latticeport {} {command}\n# written at unix time {stamp}\n{}",
            env!("CARGO_PKG_VERSION"),
            config.to_toml()?
        );
        self.file(format!("{stem}.toml"), text.into_bytes());
        Ok(())
    }
}

pub const PRESET_HEADER: [&str; 8] =
    ["name", "u_x_ER", "u_xbar_ER", "u_y_ER", "omega_x_ER", "omega_y_ER", "T_x", "l_x"];

/// One line per preset: depths, oscillator scales and stability. Frequencies
/// are `ħω` in E_R, `T_x` in `ħ/E_R` and `l_x` in `1/k_L`.
pub fn presets() -> Vec<String> {
    let mut lines = vec![format!("{},status", PRESET_HEADER.join(","))];
    for kind in LatticeKind::ALL {
        let [u_x, u_xbar, u_y] = kind.depths();
        let line = match harmonic_approximation(&preset(kind)) {
            Ok(hp) => format!(
                "{kind},{u_x},{u_xbar},{u_y},{:.6},{:.6},{:.6},{:.6},stable",
                to_recoil(hp.omega_x),
                to_recoil(hp.omega_y),
                hp.period_x() * RECOIL_ENERGY,
                hp.length_x()
            ),
            Err(_) => format!("{kind},{u_x},{u_xbar},{u_y},,,,,experimental: no confining ω_x at θ=0"),
        };
        lines.push(line);
    }
    lines
}

pub fn ground_state(config: &RunConfig) -> Result<Report, CliError> {
    let setup = TransportSetup::prepare(&config.transport)?;
    let mut report = Report::default();
    report.csv("ground_state.csv", |w| write_field(w, &setup.grid, &setup.ground.state.density(), "density"))?;
    report.csv("potential.csv", |w| write_potential(w, &setup.grid, &setup.potential))?;
    let e0 = to_recoil(setup.ground.energy);
    report.csv("ground_state_energy.csv", |w| {
        write_rows(w, &["E_0_ER", "iterations"], [[e0, setup.ground.iterations as f64]])
    })?;
    report.sidecar("ground_state", "ground-state", config)?;
    report.summary.push(format!("E_0 = {e0:.10} E_R after {} iterations", setup.ground.iterations));
    Ok(report)
}

const TRAJECTORY_SAMPLES: usize = 1001;

/// Trajectory along x in oscillator units plus the AOM detuning program.
/// Depends only on the harmonic design, so no ground state is computed.
pub fn trajectory(config: &RunConfig) -> Result<Report, CliError> {
    let c = &config.transport;
    let params = c.lattice_params()?;
    let hp = harmonic_approximation(&params)?;
    let (t_x, l_x) = (hp.period_x(), hp.length_x());
    let d = [
        snap_distance(c.distance_x_lx * l_x, params.translation_period_x()),
        snap_distance(c.distance_y_lx * l_x, params.translation_period_y()),
    ];
    let traj = trajectory_2d(&TransportSpec::new(d[0], d[1], c.t_f_tx * t_x)?, &hp)?;
    let t_f = traj.t_f();

    let mut rows = Vec::with_capacity(TRAJECTORY_SAMPLES);
    for i in 0..TRAJECTORY_SAMPLES {
        let t = t_f * i as f64 / (TRAJECTORY_SAMPLES - 1) as f64;
        // the boundary conditions fix the end velocities at zero
        let v = if i == 0 || i == TRAJECTORY_SAMPLES - 1 { 0.0 } else { traj.x.velocity(t) };
        rows.push([t / t_x, traj.x.position(t) / l_x, v * t_x / l_x, traj.x.acceleration(t) * t_x * t_x / l_x]);
    }
    let mut report = Report::default();
    report.csv("trajectory.csv", |w| write_rows(w, &["t", "q0", "q0dot", "q0ddot"], rows))?;

    let program = aom_program(&traj.x, params.k_l, TRAJECTORY_SAMPLES)?;
    report.csv("aom.csv", |w| {
        write_rows(w, &["t_in_Tx", "delta_f_times_Tx"], program.iter().map(|(t, f)| [t / t_x, f * t_x]))
    })?;
    report.sidecar("trajectory", "trajectory", config)?;
    report.summary.push(format!(
        "d_actual = {:.6} l_x over {} T_x, max |q0ddot| = {:.6} l_x/T_x^2",
        d[0] / l_x,
        c.t_f_tx,
        traj.x.max_abs_acceleration(2001) * t_x * t_x / l_x
    ));
    Ok(report)
}

pub fn transport(config: &RunConfig) -> Result<Report, CliError> {
    let setup = TransportSetup::prepare(&config.transport)?;
    let result = setup.run(config.transport.t_f_tx)?;
    let mut report = Report::default();
    let point = SweepPoint { t_f_tx: config.transport.t_f_tx, outcome: Ok(result) };
    report.csv("transport.csv", |w| write_sweep(w, std::slice::from_ref(&point)))?;
    report.sidecar("transport", "transport", config)?;
    report.summary.push(format!("F = {:.10} at t_f = {} T_x", result.fidelity, result.t_f_over_tx));
    Ok(report)
}

fn sweep_report(config: &RunConfig, stem: &str, command: &str) -> Result<Report, CliError> {
    let setup = TransportSetup::prepare(&config.transport)?;
    let points = sweep_tf(&setup, &config.sweep.t_f_tx)?;
    let mut report = Report::default();
    report.csv(&format!("{stem}.csv"), |w| write_sweep(w, &points))?;
    report.sidecar(stem, command, config)?;

    let failed = points.iter().filter(|p| p.outcome.is_err()).count();
    if failed > 0 {
        report.summary.push(format!("{failed} of {} points failed", points.len()));
    }
    let threshold = config.sweep.breakdown_threshold;
    report.summary.push(match breakdown_time(&fidelity_curve(&points), threshold) {
        Ok(t) => format!("breakdown (F = {threshold}) at {t:.4} T_x"),
        Err(e) => format!("no breakdown time: {e}"),
    });
    Ok(report)
}

pub fn sweep(config: &RunConfig) -> Result<Report, CliError> {
    sweep_report(config, "sweep", "sweep")
}

pub fn robustness(config: &RunConfig) -> Result<Report, CliError> {
    let r = &config.robustness;
    let points = robustness_sweep(&config.transport, r.perturbation, &r.magnitudes_pct)?;
    let mut report = Report::default();
    report.csv("robustness.csv", |w| write_robustness(w, &points))?;
    report.sidecar("robustness", "robustness", config)?;
    for p in &points {
        report.summary.push(match &p.outcome {
            Ok(res) => format!("{} {:+}%: F = {:.8}", r.perturbation, p.magnitude_pct, res.fidelity),
            Err(e) => format!("{} {:+}%: failed ({e})", r.perturbation, p.magnitude_pct),
        });
    }
    Ok(report)
}

/// Configuration of one figure panel; `--grid` and `--tol` still apply.
pub fn figure_run_config(fig: u8, panel: char, distance_lx: u32, overrides: Overrides) -> Result<RunConfig, CliError> {
    let (transport, t_f_tx) = figure_config(fig, panel, distance_lx).map_err(|e| CliError::Config(e.to_string()))?;
    let mut config = RunConfig { transport, ..RunConfig::default() };
    config.sweep.t_f_tx = t_f_tx;
    config.apply(overrides);
    config.validate()?;
    Ok(config)
}

pub fn figure(config: &RunConfig, fig: u8, panel: char, distance_lx: u32) -> Result<Report, CliError> {
    let stem = format!("figure{fig}{}_d{distance_lx}", panel.to_ascii_lowercase());
    sweep_report(config, &stem, "figure")
}

//! Transport runs, fidelity sweeps and breakdown analysis.
//!
//! External quantities use the oscillator scales of the transported axis:
//! distances in `l_x`, times in `T_x`, energies in `E_R`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::Grid2D;
use crate::ground_state::{imaginary_time_evolve, GroundState, ItetConfig};
use crate::lattice::{
    evaluate_potential_batch, harmonic_approximation, preset, HarmonicParams, LatticeKind, LatticeParams,
};
use crate::output;
use crate::propagator::{SplitOperator, StepperConfig};
use crate::trajectory::{trajectory_2d, TrajectoryPair, TransportSpec};
use crate::units::to_recoil;
use crate::wavefunction::WaveFunction;

pub const DEFAULT_BREAKDOWN_THRESHOLD: f64 = 0.9;

/// Transport times, in `T_x`, sampled by figure sweeps.
pub const FIGURE_TF_GRID_TX: [f64; 16] =
    [2.0, 3.0, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 8.0, 9.0, 10.0, 12.0, 15.0, 20.0, 30.0];

/// A named preset or explicit lattice parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeSpec {
    Preset(LatticeKind),
    Custom(LatticeParams),
}

impl LatticeSpec {
    pub fn params(&self) -> LatticeParams {
        match self {
            LatticeSpec::Preset(kind) => preset(*kind),
            LatticeSpec::Custom(p) => *p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSettings {
    pub n_x: usize,
    pub n_y: usize,
    /// Window size in whole lattice periods.
    pub periods_x: usize,
    pub periods_y: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { n_x: 128, n_y: 128, periods_x: 2, periods_y: 2 }
    }
}

fn one() -> f64 {
    1.0
}

fn default_t_f() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    pub lattice: LatticeSpec,
    #[serde(default = "one")]
    pub depth_scale: f64,
    #[serde(default)]
    pub distance_x_lx: f64,
    #[serde(default)]
    pub distance_y_lx: f64,
    #[serde(default = "default_t_f")]
    pub t_f_tx: f64,
    /// Replace the lattice by its harmonic expansion.
    #[serde(default)]
    pub harmonic: bool,
    #[serde(default)]
    pub grid: GridSettings,
    #[serde(default)]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub ite: ItetConfig,
}

impl TransportConfig {
    pub fn new(lattice: LatticeSpec) -> Self {
        Self {
            lattice,
            depth_scale: 1.0,
            distance_x_lx: 0.0,
            distance_y_lx: 0.0,
            t_f_tx: default_t_f(),
            harmonic: false,
            grid: GridSettings::default(),
            stepper: StepperConfig::default(),
            ite: ItetConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.params().validate()?;
        if !(self.depth_scale > 0.0 && self.depth_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("depth_scale must be positive, got {}", self.depth_scale)));
        }
        if !(self.distance_x_lx.is_finite() && self.distance_y_lx.is_finite()) {
            return Err(Error::InvalidParameter("distances must be finite".into()));
        }
        if !(self.t_f_tx > 0.0 && self.t_f_tx.is_finite()) {
            return Err(Error::InvalidDuration(self.t_f_tx));
        }
        let g = &self.grid;
        if g.n_x < 8 || g.n_y < 8 || g.periods_x == 0 || g.periods_y == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 8 points and one period per axis, got {}x{} over {}x{} periods",
                g.n_x, g.n_y, g.periods_x, g.periods_y
            )));
        }
        self.stepper.validate()?;
        self.ite.validate()
    }

    /// Lattice after depth scaling.
    pub fn lattice_params(&self) -> Result<LatticeParams> {
        self.lattice.params().scale_depths(self.depth_scale)
    }
}

/// Everything about a configuration that does not depend on `t_f`:
/// window, potential, snapped distances and the initial ground state.
#[derive(Debug, Clone)]
pub struct TransportSetup {
    pub config: TransportConfig,
    /// Lattice the atom actually experiences.
    pub plant: LatticeParams,
    /// Harmonic parameters the trajectory is designed for; also fix the units.
    pub design: HarmonicParams,
    pub grid: Arc<Grid2D>,
    pub potential: Array2<f64>,
    pub ground: GroundState,
    /// Snapped distances, internal units.
    pub d_actual: [f64; 2],
}

/// Nearest whole number of translation periods.
pub fn snap_distance(d: f64, period: f64) -> f64 {
    (d / period).round() * period
}

impl TransportSetup {
    pub fn prepare(config: &TransportConfig) -> Result<Self> {
        Self::prepare_perturbed(config, 1.0)
    }

    /// Prepares a run where the lattice depths differ by `depth_factor` from
    /// the values the trajectory is designed for.
    pub fn prepare_perturbed(config: &TransportConfig, depth_factor: f64) -> Result<Self> {
        config.validate()?;
        let nominal = config.lattice_params()?;
        let design = harmonic_approximation(&nominal)?;
        let plant = nominal.scale_depths(depth_factor)?;
        let plant_hp = harmonic_approximation(&plant)?;

        let l_x = design.length_x();
        let d_actual = [
            snap_distance(config.distance_x_lx * l_x, plant.translation_period_x()),
            snap_distance(config.distance_y_lx * l_x, plant.translation_period_y()),
        ];

        let g = &config.grid;
        let period = plant.period();
        let center = if config.harmonic { plant_hp.equilibrium() } else { plant.central_minimum()? };
        let grid = Arc::new(Grid2D::centered(
            g.n_x,
            g.n_y,
            g.periods_x as f64 * period,
            g.periods_y as f64 * period,
            center,
        )?);
        let potential =
            if config.harmonic { plant_hp.field(&grid) } else { evaluate_potential_batch(&plant, &grid)? };
        let ground = imaginary_time_evolve(&potential, grid.clone(), &config.ite, None)?;
        Ok(Self { config: config.clone(), plant, design, grid, potential, ground, d_actual })
    }

    pub fn t_x(&self) -> f64 {
        self.design.period_x()
    }

    pub fn l_x(&self) -> f64 {
        self.design.length_x()
    }

    pub fn trajectory(&self, t_f_tx: f64) -> Result<TrajectoryPair> {
        let spec = TransportSpec::new(self.d_actual[0], self.d_actual[1], t_f_tx * self.t_x())?;
        trajectory_2d(&spec, &self.design)
    }

    pub fn run(&self, t_f_tx: f64) -> Result<TransportResult> {
        self.run_mismatched(t_f_tx, 1.0, 1.0)
    }

    /// Runs a trajectory designed for `t_f_tx` but executed over
    /// `timing_factor` times that duration and `amplitude_factor` times the
    /// distance. Fidelity is taken against the ground state at the designed
    /// final position.
    pub fn run_mismatched(&self, t_f_tx: f64, timing_factor: f64, amplitude_factor: f64) -> Result<TransportResult> {
        let designed = self.trajectory(t_f_tx)?;
        let executed = TrajectoryPair {
            x: designed.x.retimed(designed.x.t_f * timing_factor)?.scaled(amplitude_factor),
            y: designed.y.retimed(designed.y.t_f * timing_factor)?.scaled(amplitude_factor),
        };

        let mut op = SplitOperator::new(self.grid.clone(), self.potential.clone())?;
        let mut psi = self.ground.state.clone();
        let history = op.propagate(&mut psi, &executed, &self.config.stepper)?;
        let e_final = op.energy(&psi)?;

        let overshoot = [
            (amplitude_factor - 1.0) * self.d_actual[0],
            (amplitude_factor - 1.0) * self.d_actual[1],
        ];
        if overshoot != [0.0, 0.0] {
            psi = translate(&psi, overshoot)?;
        }

        let t_x = self.t_x();
        let l_x = self.l_x();
        Ok(TransportResult {
            fidelity: fidelity(&psi, &self.ground.state)?,
            t_f_over_tx: executed.t_f() / t_x,
            d_actual_lx: [self.d_actual[0] / l_x, self.d_actual[1] / l_x],
            max_accel: executed.max_abs_acceleration(2001) * t_x * t_x / l_x,
            e_initial: to_recoil(self.ground.energy),
            e_final: to_recoil(e_final),
            n_steps: history.n_steps(),
            n_rejected: history.n_rejected,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportResult {
    pub fidelity: f64,
    pub t_f_over_tx: f64,
    /// Snapped distances in `l_x`.
    pub d_actual_lx: [f64; 2],
    /// Largest |q̈_0| in `l_x / T_x²`.
    pub max_accel: f64,
    /// Comoving-frame energies in `E_R`.
    pub e_initial: f64,
    pub e_final: f64,
    pub n_steps: usize,
    pub n_rejected: usize,
}

/// `|⟨target|ψ⟩|²`.
pub fn fidelity(psi: &WaveFunction, target: &WaveFunction) -> Result<f64> {
    Ok(target.inner(psi)?.norm_sqr())
}

/// Periodic translation by `shift` via the Fourier shift theorem.
fn translate(psi: &WaveFunction, shift: [f64; 2]) -> Result<WaveFunction> {
    let grid = psi.grid().clone();
    let (n_x, n_y) = grid.shape();
    let mut fft = Fft2::new(n_x, n_y);
    let mut field = psi.amplitudes().clone();
    fft.forward(&mut field)?;
    for ((i, j), c) in field.indexed_iter_mut() {
        *c *= Complex64::from_polar(1.0, -(grid.k_x()[i] * shift[0] + grid.k_y()[j] * shift[1]));
    }
    fft.inverse(&mut field)?;
    WaveFunction::new(grid, field)
}

pub fn run_transport(config: &TransportConfig) -> Result<TransportResult> {
    TransportSetup::prepare(config)?.run(config.t_f_tx)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub t_f_tx: f64,
    pub outcome: Result<TransportResult>,
}

fn check_ascending(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("t_f list is empty".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) || values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::InvalidParameter("t_f list must be positive and strictly ascending".into()));
    }
    Ok(())
}

/// Independent transports for every `t_f` (in `T_x`), run in parallel.
/// Failed points are kept with their error.
pub fn sweep_tf(setup: &TransportSetup, t_f_tx: &[f64]) -> Result<Vec<SweepPoint>> {
    check_ascending(t_f_tx)?;
    Ok(t_f_tx.par_iter().map(|&t| SweepPoint { t_f_tx: t, outcome: setup.run(t) }).collect())
}

/// `(t_f/T_x, F)` pairs of the successful points.
pub fn fidelity_curve(points: &[SweepPoint]) -> Vec<(f64, f64)> {
    points
        .iter()
        .filter_map(|p| p.outcome.as_ref().ok().map(|r| (p.t_f_tx, r.fidelity)))
        .collect()
}

/// First `t_f` at which the curve rises through `threshold`, by linear
/// interpolation between the bracketing samples.
pub fn breakdown_time(curve: &[(f64, f64)], threshold: f64) -> Result<f64> {
    curve
        .windows(2)
        .find(|w| w[0].1 < threshold && w[1].1 >= threshold)
        .map(|w| {
            let ((t0, f0), (t1, f1)) = (w[0], w[1]);
            t0 + (threshold - f0) * (t1 - t0) / (f1 - f0)
        })
        .ok_or(Error::NoBracket { threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Lattice depths off by the given percentage.
    DepthErrorPct,
    /// Trajectory executed over a duration off by the given percentage.
    TimingErrorPct,
    /// Lattice displacement off by the given percentage.
    TrajectoryAmplitudeErrorPct,
}

impl Perturbation {
    pub const ALL: [Perturbation; 3] =
        [Perturbation::DepthErrorPct, Perturbation::TimingErrorPct, Perturbation::TrajectoryAmplitudeErrorPct];

    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::DepthErrorPct => "depth_error_pct",
            Perturbation::TimingErrorPct => "timing_error_pct",
            Perturbation::TrajectoryAmplitudeErrorPct => "trajectory_amplitude_error_pct",
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Perturbation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown perturbation '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct RobustnessPoint {
    pub magnitude_pct: f64,
    pub outcome: Result<TransportResult>,
}

/// Transport at `config.t_f_tx` with the trajectory designed for the
/// nominal setup while the named parameter is off by each magnitude.
pub fn robustness_sweep(
    config: &TransportConfig,
    perturbation: Perturbation,
    magnitudes_pct: &[f64],
) -> Result<Vec<RobustnessPoint>> {
    if magnitudes_pct.is_empty() {
        return Err(Error::InvalidParameter("magnitude list is empty".into()));
    }
    let nominal = match perturbation {
        Perturbation::DepthErrorPct => None,
        _ => Some(TransportSetup::prepare(config)?),
    };
    let t_f = config.t_f_tx;
    Ok(magnitudes_pct
        .par_iter()
        .map(|&pct| {
            let factor = 1.0 + pct / 100.0;
            let outcome = match (&nominal, perturbation) {
                (Some(setup), Perturbation::TimingErrorPct) => setup.run_mismatched(t_f, factor, 1.0),
                (Some(setup), _) => setup.run_mismatched(t_f, 1.0, factor),
                (None, _) => TransportSetup::prepare_perturbed(config, factor).and_then(|s| s.run(t_f)),
            };
            RobustnessPoint { magnitude_pct: pct, outcome }
        })
        .collect())
}

/// Lattice family shown in each fidelity figure.
pub fn figure_lattice(fig: u8) -> Result<LatticeKind> {
    match fig {
        5 => Ok(LatticeKind::Honeycomb),
        6 => Ok(LatticeKind::Square),
        7 => Ok(LatticeKind::Chains1D),
        8 => Ok(LatticeKind::Dimerized),
        _ => Err(Error::InvalidParameter(format!("figure must be 5, 6, 7 or 8, got {fig}"))),
    }
}

/// Depth multiplier of panels a, b and c.
pub fn panel_scale(panel: char) -> Result<f64> {
    match panel.to_ascii_lowercase() {
        'a' => Ok(1.0),
        'b' => Ok(2.0),
        'c' => Ok(4.0),
        _ => Err(Error::InvalidParameter(format!("panel must be a, b or c, got {panel}"))),
    }
}

/// Sweep configuration of one figure panel and distance.
pub fn figure_config(fig: u8, panel: char, distance_lx: u32) -> Result<(TransportConfig, Vec<f64>)> {
    let kind = figure_lattice(fig)?;
    let scale = panel_scale(panel)?;
    if distance_lx != 100 && distance_lx != 400 {
        return Err(Error::InvalidParameter(format!("distance must be 100 or 400 l_x, got {distance_lx}")));
    }
    let mut config = TransportConfig::new(LatticeSpec::Preset(kind));
    config.depth_scale = scale;
    config.distance_x_lx = distance_lx as f64;
    Ok((config, FIGURE_TF_GRID_TX.to_vec()))
}

#[derive(Debug, Clone)]
pub struct FigureRun {
    pub config: TransportConfig,
    pub t_f_tx: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

pub fn reproduce_figure(fig: u8, panel: char, distance_lx: u32) -> Result<FigureRun> {
    let (config, t_f_tx) = figure_config(fig, panel, distance_lx)?;
    let setup = TransportSetup::prepare(&config)?;
    let points = sweep_tf(&setup, &t_f_tx)?;
    Ok(FigureRun { config, t_f_tx, points })
}

pub const SWEEP_HEADER: [&str; 8] =
    ["t_f_over_Tx", "fidelity", "d_actual_x", "d_actual_y", "max_accel", "E_initial", "E_final", "n_steps"];

fn result_row(t_f_tx: f64, outcome: &Result<TransportResult>) -> [f64; 8] {
    match outcome {
        Ok(r) => [
            r.t_f_over_tx,
            r.fidelity,
            r.d_actual_lx[0],
            r.d_actual_lx[1],
            r.max_accel,
            r.e_initial,
            r.e_final,
            r.n_steps as f64,
        ],
        Err(_) => {
            let mut row = [f64::NAN; 8];
            row[0] = t_f_tx;
            row
        }
    }
}

/// Sweep table; failed points keep their `t_f` with NaN entries.
pub fn write_sweep<W: Write>(writer: W, points: &[SweepPoint]) -> Result<()> {
    output::write_rows(writer, &SWEEP_HEADER, points.iter().map(|p| result_row(p.t_f_tx, &p.outcome)))
}

pub fn write_robustness<W: Write>(writer: W, points: &[RobustnessPoint]) -> Result<()> {
    let mut header = vec!["magnitude_pct"];
    header.extend(SWEEP_HEADER);
    output::write_rows(
        writer,
        &header,
        points.iter().map(|p| {
            let mut row = vec![p.magnitude_pct];
            row.extend(result_row(f64::NAN, &p.outcome));
            row
        }),
    )
}

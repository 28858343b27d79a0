//! Ground states by imaginary-time evolution.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::propagator::SplitOperator;
use crate::wavefunction::WaveFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ItetConfig {
    /// Final imaginary-time step.
    pub dtau: f64,
    /// First step of the annealing schedule; halved on each convergence
    /// until it reaches `dtau`.
    pub dtau_start: f64,
    /// Relative energy change per unit imaginary time that counts as converged.
    pub energy_tol: f64,
    pub max_iterations: usize,
}

impl Default for ItetConfig {
    fn default() -> Self {
        Self { dtau: 1e-3, dtau_start: 1e-2, energy_tol: 1e-10, max_iterations: 200_000 }
    }
}

impl ItetConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("dtau", self.dtau), ("dtau_start", self.dtau_start), ("energy_tol", self.energy_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: WaveFunction,
    pub energy: f64,
    pub iterations: usize,
}

/// Broad Gaussian centred on the lowest node of `potential`. Periodic
/// copies of the same well tie up to roundoff; the one nearest the window
/// centre wins so the seed stays clear of the window edge.
pub fn default_seed(potential: &Array2<f64>, grid: Arc<Grid2D>) -> Result<WaveFunction> {
    grid.check_shape(potential)?;
    let lowest = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let tie = 1e-9 * lowest.abs().max(1.0);
    let mid = grid.center();
    let mut best = ([mid[0], mid[1]], f64::INFINITY);
    for ((i, j), u) in potential.indexed_iter() {
        if *u <= lowest + tie {
            let p = [grid.x()[i], grid.y()[j]];
            let dist = (p[0] - mid[0]).hypot(p[1] - mid[1]);
            if dist < best.1 {
                best = (p, dist);
            }
        }
    }
    let center = best.0;
    let width = PI / 8.0;
    WaveFunction::gaussian(grid, center, [width, width], [0.0, 0.0])
}

/// `⟨ψ|k²/2|ψ⟩ + ⟨ψ|U|ψ⟩`.
pub fn energy_expectation(psi: &WaveFunction, potential: &Array2<f64>) -> Result<f64> {
    SplitOperator::new(psi.grid().clone(), potential.clone())?.energy(psi)
}

const SEED_CHECK_STEPS: usize = 10;

pub fn imaginary_time_evolve(
    potential: &Array2<f64>,
    grid: Arc<Grid2D>,
    cfg: &ItetConfig,
    seed: Option<WaveFunction>,
) -> Result<GroundState> {
    cfg.validate()?;
    let mut op = SplitOperator::new(grid.clone(), potential.clone())?;
    let mut psi = match seed {
        Some(s) => s,
        None => default_seed(potential, grid)?,
    };
    psi.normalize()?;
    let seed_state = psi.clone();

    let mut dtau = cfg.dtau_start.max(cfg.dtau);
    let mut energy = op.energy(&psi)?;
    for iteration in 1..=cfg.max_iterations {
        op.imaginary_step(&mut psi, dtau)?;
        psi.normalize()?;
        if iteration == SEED_CHECK_STEPS && seed_state.inner(&psi)?.norm() < 1e-14 {
            return Err(Error::DegenerateSeed);
        }
        let next = op.energy(&psi)?;
        let change = (next - energy).abs() / (energy.abs().max(energy_floor(&op)) * dtau);
        energy = next;
        if change < cfg.energy_tol {
            if dtau <= cfg.dtau {
                return Ok(GroundState { state: psi, energy, iterations: iteration });
            }
            dtau = (0.5 * dtau).max(cfg.dtau);
        }
    }
    Err(Error::NoConvergence { what: "imaginary-time evolution", iterations: cfg.max_iterations })
}

/// Energy scale below which the relative criterion switches to absolute:
/// the lowest nonzero kinetic level of the window.
fn energy_floor(op: &SplitOperator) -> f64 {
    0.5 * op.grid().min_wave_number().powi(2)
}

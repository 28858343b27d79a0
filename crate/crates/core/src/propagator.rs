//! Fourier split-operator propagation in the frame comoving with the lattice.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::Grid2D;
use crate::output;
use crate::trajectory::TrajectoryPair;
use crate::wavefunction::WaveFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    /// Step-doubling error target per accepted step.
    pub rel_tol: f64,
    /// Number of macro steps over `[0, t_f]`, clamped to `[20, 100]`.
    pub n_t_initial: usize,
    /// Largest number of halvings of a macro step.
    pub max_halvings: u32,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-4, n_t_initial: 50, max_halvings: 30 }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_halvings > 60 {
            return Err(Error::InvalidParameter("max_halvings must not exceed 60".into()));
        }
        Ok(())
    }

    pub fn macro_steps(&self) -> usize {
        self.n_t_initial.clamp(20, 100)
    }
}

/// One accepted step of an adaptive run, taken at the end of the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub norm: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Propagation {
    pub history: Vec<StepRecord>,
    pub n_rejected: usize,
}

impl Propagation {
    pub fn n_steps(&self) -> usize {
        self.history.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_px: f64,
    pub mean_py: f64,
    pub kinetic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Time {
    Real,
    Imaginary,
}

#[derive(Debug)]
struct Phases {
    half_kick: Array2<Complex64>,
    kinetic: Array2<Complex64>,
}

const PHASE_CACHE_LIMIT: usize = 32;

/// Split-operator stepper for a fixed potential on a fixed grid.
#[derive(Debug)]
pub struct SplitOperator {
    grid: Arc<Grid2D>,
    potential: Array2<f64>,
    potential_min: f64,
    half_k_sq: Array2<f64>,
    fft: Fft2,
    cache: HashMap<(Time, u64), Arc<Phases>>,
    boost_x: Vec<Complex64>,
    boost_y: Vec<Complex64>,
}

impl Clone for SplitOperator {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            potential: self.potential.clone(),
            potential_min: self.potential_min,
            half_k_sq: self.half_k_sq.clone(),
            fft: self.fft.clone(),
            cache: HashMap::new(),
            boost_x: self.boost_x.clone(),
            boost_y: self.boost_y.clone(),
        }
    }
}

impl SplitOperator {
    pub fn new(grid: Arc<Grid2D>, potential: Array2<f64>) -> Result<Self> {
        grid.check_shape(&potential)?;
        let (n_x, n_y) = grid.shape();
        let potential_min = potential.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            half_k_sq: grid.k_squared().mapv(|k2| 0.5 * k2),
            fft: Fft2::new(n_x, n_y),
            grid,
            potential,
            potential_min,
            cache: HashMap::new(),
            boost_x: vec![Complex64::default(); n_x],
            boost_y: vec![Complex64::default(); n_y],
        })
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn potential(&self) -> &Array2<f64> {
        &self.potential
    }

    fn phases(&mut self, time: Time, dt: f64) -> Arc<Phases> {
        let key = (time, dt.to_bits());
        if let Some(p) = self.cache.get(&key) {
            return p.clone();
        }
        if self.cache.len() >= PHASE_CACHE_LIMIT {
            self.cache.clear();
        }
        let phases = match time {
            Time::Real => Phases {
                half_kick: self.potential.mapv(|u| Complex64::from_polar(1.0, -0.5 * u * dt)),
                kinetic: self.half_k_sq.mapv(|e| Complex64::from_polar(1.0, -e * dt)),
            },
            Time::Imaginary => {
                let shift = self.potential_min;
                Phases {
                    half_kick: self.potential.mapv(|u| Complex64::new((-0.5 * (u - shift) * dt).exp(), 0.0)),
                    kinetic: self.half_k_sq.mapv(|e| Complex64::new((-e * dt).exp(), 0.0)),
                }
            }
        };
        let phases = Arc::new(phases);
        self.cache.insert(key, phases.clone());
        phases
    }

    fn check(&self, psi: &WaveFunction) -> Result<()> {
        if Arc::ptr_eq(psi.grid(), &self.grid) || **psi.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Strang step for the static potential.
    pub fn strang_step_static(&mut self, psi: &mut WaveFunction, dt: f64) -> Result<()> {
        self.comoving_step(psi, [0.0, 0.0], dt)
    }

    /// One comoving-frame step where the lattice velocity changes by `dv`
    /// over `dt`: half kick, boost, kinetic and momentum-shift phases in
    /// Fourier space, half kick.
    pub fn comoving_step(&mut self, psi: &mut WaveFunction, dv: [f64; 2], dt: f64) -> Result<()> {
        self.check(psi)?;
        let phases = self.phases(Time::Real, dt);
        let moving = dv != [0.0, 0.0];
        let field = psi.amplitudes_mut();

        Zip::from(&mut *field).and(&phases.half_kick).for_each(|c, p| *c *= p);

        if moving {
            let center = self.grid.center();
            for (b, x) in self.boost_x.iter_mut().zip(self.grid.x()) {
                *b = Complex64::from_polar(1.0, -(x - center[0]) * dv[0]);
            }
            for (b, y) in self.boost_y.iter_mut().zip(self.grid.y()) {
                *b = Complex64::from_polar(1.0, -(y - center[1]) * dv[1]);
            }
            apply_separable(field, &self.boost_x, &self.boost_y);
        }

        self.fft.forward(field)?;
        Zip::from(&mut *field).and(&phases.kinetic).for_each(|c, p| *c *= p);
        if moving {
            for (b, k) in self.boost_x.iter_mut().zip(self.grid.k_x()) {
                *b = Complex64::from_polar(1.0, -0.5 * k * dv[0] * dt);
            }
            for (b, k) in self.boost_y.iter_mut().zip(self.grid.k_y()) {
                *b = Complex64::from_polar(1.0, -0.5 * k * dv[1] * dt);
            }
            apply_separable(field, &self.boost_x, &self.boost_y);
        }
        self.fft.inverse(field)?;

        Zip::from(&mut *field).and(&phases.half_kick).for_each(|c, p| *c *= p);
        Ok(())
    }

    /// Wick-rotated Strang step with the potential shifted by its minimum.
    /// The result is not renormalized.
    pub fn imaginary_step(&mut self, psi: &mut WaveFunction, dtau: f64) -> Result<()> {
        self.check(psi)?;
        let phases = self.phases(Time::Imaginary, dtau);
        let field = psi.amplitudes_mut();
        Zip::from(&mut *field).and(&phases.half_kick).for_each(|c, p| *c *= p);
        self.fft.forward(field)?;
        Zip::from(&mut *field).and(&phases.kinetic).for_each(|c, p| *c *= p);
        self.fft.inverse(field)?;
        Zip::from(&mut *field).and(&phases.half_kick).for_each(|c, p| *c *= p);
        Ok(())
    }

    fn step_between(&mut self, psi: &mut WaveFunction, traj: &TrajectoryPair, t0: f64, t1: f64) -> Result<()> {
        let v0 = traj.velocity(t0);
        let v1 = traj.velocity(t1);
        self.comoving_step(psi, [v1[0] - v0[0], v1[1] - v0[1]], t1 - t0)
    }

    /// Transport with `n_steps` equal steps.
    pub fn propagate_fixed(&mut self, psi: &mut WaveFunction, traj: &TrajectoryPair, n_steps: usize) -> Result<()> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("need at least one step".into()));
        }
        let t_f = traj.t_f();
        for i in 0..n_steps {
            let t0 = t_f * i as f64 / n_steps as f64;
            let t1 = t_f * (i + 1) as f64 / n_steps as f64;
            self.step_between(psi, traj, t0, t1)?;
        }
        Ok(())
    }

    /// Adaptive transport over `[0, t_f]`.
    ///
    /// Each macro step is covered by sub-steps of size `macro / 2^level`. A
    /// sub-step is accepted when one full step and two half steps differ by
    /// less than `rel_tol` in the L2 norm; the two-half result is kept.
    /// Rejection halves the step; a comfortably accepted step on an aligned
    /// position doubles it again.
    pub fn propagate(
        &mut self,
        psi: &mut WaveFunction,
        traj: &TrajectoryPair,
        cfg: &StepperConfig,
    ) -> Result<Propagation> {
        cfg.validate()?;
        self.check(psi)?;
        let t_f = traj.t_f();
        let n_macro = cfg.macro_steps();
        let floor = t_f * 1e-9;
        let units: u64 = 1 << cfg.max_halvings;
        let mut level: u32 = 0;
        let mut out = Propagation::default();

        for m in 0..n_macro {
            let t_start = t_f * m as f64 / n_macro as f64;
            let t_end = t_f * (m + 1) as f64 / n_macro as f64;
            let span = t_end - t_start;
            let mut pos: u64 = 0;
            while pos < units {
                let step_units = units >> level;
                let t0 = t_start + span * pos as f64 / units as f64;
                let t1 = if pos + step_units == units {
                    t_end
                } else {
                    t_start + span * (pos + step_units) as f64 / units as f64
                };
                let dt = t1 - t0;
                if dt < floor {
                    return Err(Error::StepUnderflow { dt, floor });
                }
                let tm = 0.5 * (t0 + t1);

                let mut full = psi.clone();
                self.step_between(&mut full, traj, t0, t1)?;
                let mut halves = psi.clone();
                self.step_between(&mut halves, traj, t0, tm)?;
                self.step_between(&mut halves, traj, tm, t1)?;
                let err = full.distance(&halves)? / psi.norm_sq().sqrt();

                if err < cfg.rel_tol {
                    *psi = halves;
                    pos += step_units;
                    let (mean_x, mean_y) = mean_position(psi);
                    out.history.push(StepRecord { t: t1, norm: psi.norm_sq().sqrt(), mean_x, mean_y, dt });
                    if err < cfg.rel_tol / 8.0 && level > 0 && pos.is_multiple_of(2 * step_units) {
                        level -= 1;
                    }
                } else {
                    out.n_rejected += 1;
                    if level >= cfg.max_halvings {
                        return Err(Error::StepUnderflow { dt: 0.5 * dt, floor });
                    }
                    level += 1;
                }
            }
        }
        Ok(out)
    }

    /// Kinetic energy by spectral quadrature.
    pub fn kinetic_energy(&mut self, psi: &WaveFunction) -> Result<f64> {
        self.check(psi)?;
        let mut spectrum = psi.amplitudes().clone();
        self.fft.forward(&mut spectrum)?;
        let mut acc = 0.0;
        Zip::from(&spectrum).and(&self.half_k_sq).for_each(|c, e| acc += e * c.norm_sqr());
        Ok(acc * self.grid.cell_area())
    }

    /// Potential energy by real-space quadrature.
    pub fn potential_energy(&self, psi: &WaveFunction) -> Result<f64> {
        self.check(psi)?;
        let mut acc = 0.0;
        Zip::from(psi.amplitudes()).and(&self.potential).for_each(|c, u| acc += u * c.norm_sqr());
        Ok(acc * self.grid.cell_area())
    }

    pub fn energy(&mut self, psi: &WaveFunction) -> Result<f64> {
        Ok(self.kinetic_energy(psi)? + self.potential_energy(psi)?)
    }

    pub fn observables(&mut self, psi: &WaveFunction) -> Result<Observables> {
        self.check(psi)?;
        spectral_observables(&mut self.fft, psi)
    }
}

fn apply_separable(field: &mut Array2<Complex64>, fx: &[Complex64], fy: &[Complex64]) {
    for (mut row, px) in field.rows_mut().into_iter().zip(fx) {
        for (c, py) in row.iter_mut().zip(fy) {
            *c *= px * py;
        }
    }
}

fn mean_position(psi: &WaveFunction) -> (f64, f64) {
    let grid = psi.grid();
    let (mut mx, mut my) = (0.0, 0.0);
    for ((i, j), c) in psi.amplitudes().indexed_iter() {
        let p = c.norm_sqr();
        mx += p * grid.x()[i];
        my += p * grid.y()[j];
    }
    let w = grid.cell_area();
    (mx * w, my * w)
}

fn spectral_observables(fft: &mut Fft2, psi: &WaveFunction) -> Result<Observables> {
    let grid = psi.grid();
    let (mean_x, mean_y) = mean_position(psi);
    let mut spectrum = psi.amplitudes().clone();
    fft.forward(&mut spectrum)?;
    let (mut px, mut py, mut kin) = (0.0, 0.0, 0.0);
    for ((i, j), c) in spectrum.indexed_iter() {
        let p = c.norm_sqr();
        let (kx, ky) = (grid.k_x()[i], grid.k_y()[j]);
        px += p * kx;
        py += p * ky;
        kin += p * 0.5 * (kx * kx + ky * ky);
    }
    let w = grid.cell_area();
    Ok(Observables { mean_x, mean_y, mean_px: px * w, mean_py: py * w, kinetic: kin * w })
}

/// Position and momentum moments of `psi`.
pub fn observables(psi: &WaveFunction) -> Result<Observables> {
    let (n_x, n_y) = psi.grid().shape();
    spectral_observables(&mut Fft2::new(n_x, n_y), psi)
}

/// Writes the accepted-step history as CSV.
pub fn write_trace<W: Write>(writer: W, history: &[StepRecord]) -> Result<()> {
    output::write_rows(
        writer,
        &["t", "norm", "mean_x", "mean_y", "dt"],
        history.iter().map(|r| [r.t, r.norm, r.mean_x, r.mean_y, r.dt]),
    )
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn free_operator(n: usize, extent: f64) -> SplitOperator {
        let grid = Arc::new(Grid2D::new(n, n, extent, extent).unwrap());
        SplitOperator::new(grid, Array2::zeros((n, n))).unwrap()
    }

    #[test]
    fn plane_wave_picks_up_kinetic_phase() {
        let mut op = free_operator(16, 2.0 * PI);
        let grid = op.grid().clone();
        let k = grid.k_x()[2];
        let mut psi = WaveFunction::from_fn(grid.clone(), |x, _| Complex64::from_polar(1.0, k * x));
        psi.normalize().unwrap();
        let before = psi.clone();
        let dt = 0.37;
        op.strang_step_static(&mut psi, dt).unwrap();
        let expected = Complex64::from_polar(1.0, -0.5 * k * k * dt);
        for (a, b) in psi.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b * expected).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_velocity_step_is_static_step() {
        let grid = Arc::new(Grid2D::new(32, 32, 2.0 * PI, 2.0 * PI).unwrap());
        let potential = grid.sample(|x, y| -3.0 * x.cos().powi(2) - y.sin().powi(2));
        let mut op = SplitOperator::new(grid.clone(), potential).unwrap();
        let psi = WaveFunction::gaussian(grid, [0.1, 0.0], [0.6, 0.6], [0.5, 0.0]).unwrap();
        let mut a = psi.clone();
        let mut b = psi;
        op.strang_step_static(&mut a, 0.01).unwrap();
        op.comoving_step(&mut b, [0.0, 0.0], 0.01).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spectral_kinetic_matches_dense_exponential() {
        // dense oracle: DFT matrix D, evolution D⁻¹ diag(e^{-ik²dt/2}) D built
        // element by element, independent of the FFT
        let n = 8;
        let extent = 2.0 * PI;
        let mut op = free_operator(n, extent);
        let grid = op.grid().clone();
        let mut psi = WaveFunction::from_fn(grid.clone(), |x, y| {
            Complex64::new((x * 1.3).sin() + 0.2 * y, (y * 0.7).cos() * x)
        });
        psi.normalize().unwrap();
        let dt = 0.21;
        let input = psi.clone();
        op.strang_step_static(&mut psi, dt).unwrap();

        let (kx, ky) = (grid.k_x(), grid.k_y());
        let nn = (n * n) as f64;
        let mut expected = Array2::<Complex64>::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let mut acc = Complex64::default();
                for c in 0..n {
                    for d in 0..n {
                        let mut kernel = Complex64::default();
                        for p in 0..n {
                            for q in 0..n {
                                let phase = 2.0 * PI * ((p * (a + n - c)) as f64 / n as f64
                                    + (q * (b + n - d)) as f64 / n as f64)
                                    - 0.5 * (kx[p] * kx[p] + ky[q] * ky[q]) * dt;
                                kernel += Complex64::from_polar(1.0, phase);
                            }
                        }
                        acc += kernel * input.amplitudes()[[c, d]];
                    }
                }
                expected[[a, b]] = acc / nn;
            }
        }
        let dev = (psi.amplitudes() - &expected).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "deviation {dev}");
    }

    #[test]
    fn coherent_state_follows_classical_orbit() {
        let omega = 2.0;
        let n = 128;
        let grid = Arc::new(Grid2D::new(n, n, 16.0, 16.0).unwrap());
        let potential = grid.sample(|x, y| 0.5 * omega * omega * (x * x + y * y));
        let mut op = SplitOperator::new(grid.clone(), potential).unwrap();
        let x0 = 1.0;
        let sigma = 1.0 / omega.sqrt();
        let mut psi = WaveFunction::gaussian(grid, [x0, 0.0], [sigma, sigma], [0.0, 0.0]).unwrap();
        let period = 2.0 * PI / omega;
        let steps = 1000;
        for _ in 0..steps {
            op.strang_step_static(&mut psi, period / steps as f64).unwrap();
        }
        let obs = op.observables(&psi).unwrap();
        assert!((obs.mean_x - x0).abs() < 1e-4 * x0, "{}", obs.mean_x);
        assert!(obs.mean_y.abs() < 1e-10);
    }

    #[test]
    fn static_step_is_second_order() {
        let grid = Arc::new(Grid2D::new(64, 64, 2.0 * PI, 2.0 * PI).unwrap());
        let potential = grid.sample(|x, y| -10.0 * x.cos().powi(2) - 6.0 * y.cos().powi(2));
        let mut op = SplitOperator::new(grid.clone(), potential).unwrap();
        let seed = WaveFunction::gaussian(grid, [0.3, -0.2], [0.5, 0.5], [0.0, 0.0]).unwrap();
        let run = |op: &mut SplitOperator, n: usize| {
            let mut psi = seed.clone();
            for _ in 0..n {
                op.strang_step_static(&mut psi, 1.0 / n as f64).unwrap();
            }
            psi
        };
        let reference = run(&mut op, 160);
        let e1 = run(&mut op, 10).distance(&reference).unwrap();
        let e2 = run(&mut op, 20).distance(&reference).unwrap();
        let e4 = run(&mut op, 40).distance(&reference).unwrap();
        // Richardson-style: errors against the finer reference
        let ratio = (e1 - e2) / (e2 - e4);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn boosted_gaussian_momentum_and_kinetic_energy() {
        let grid = Arc::new(Grid2D::new(128, 128, 8.0 * PI, 8.0 * PI).unwrap());
        let sigma = 0.8;
        let k0 = grid.k_x()[3];
        let rest = WaveFunction::gaussian(grid.clone(), [0.0, 0.0], [sigma, sigma], [0.0, 0.0]).unwrap();
        let moving = WaveFunction::gaussian(grid, [0.0, 0.0], [sigma, sigma], [k0, 0.0]).unwrap();
        let a = observables(&rest).unwrap();
        let b = observables(&moving).unwrap();
        assert!(a.mean_px.abs() < 1e-12);
        assert!((b.mean_px - a.mean_px - k0).abs() < 1e-10);
        let per_axis = 1.0 / (4.0 * sigma * sigma);
        assert!((a.kinetic / (2.0 * per_axis) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn adaptive_stepper_rejects_tiny_floor() {
        let cfg = StepperConfig { rel_tol: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        assert_eq!(StepperConfig { n_t_initial: 5, ..Default::default() }.macro_steps(), 20);
        assert_eq!(StepperConfig { n_t_initial: 500, ..Default::default() }.macro_steps(), 100);
    }
}

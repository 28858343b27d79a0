//! Invariant-based inverse engineering of the lattice trajectory.
//!
//! For a rigid harmonic trap moved along `q_0(t)` the classical path `q_c`
//! obeys `q̈_c + ω²(q_c - q_0) = 0`. Choosing `q_c` as the minimal ninth
//! degree polynomial with value and first four derivatives pinned at both
//! ends, the trap path follows as `q_0 = q_c + q̈_c/ω²` and is again a
//! ninth-degree polynomial in `t/t_f` whose coefficients `b_3..b_9` depend
//! only on `(t_f ω)⁻²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::HarmonicParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Transport distances and duration in internal units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportSpec {
    pub d_x: f64,
    pub d_y: f64,
    pub t_f: f64,
}

impl TransportSpec {
    pub fn new(d_x: f64, d_y: f64, t_f: f64) -> Result<Self> {
        check_duration(t_f)?;
        if !(d_x.is_finite() && d_y.is_finite()) {
            return Err(Error::InvalidParameter("transport distances must be finite".into()));
        }
        Ok(Self { d_x, d_y, t_f })
    }
}

fn check_duration(t_f: f64) -> Result<()> {
    if t_f > 0.0 && t_f.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDuration(t_f))
    }
}

/// Coefficients of the classical path `q_c/d` in powers 5..9 of `t/t_f`.
pub const CLASSICAL_COEFFICIENTS: [f64; 5] = [126.0, -420.0, 540.0, -315.0, 70.0];

/// `b_3..b_9` for axis frequency `omega` and duration `t_f`.
pub fn sta_coefficients(omega: f64, t_f: f64) -> Result<[f64; 7]> {
    check_duration(t_f)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!("axis frequency must be positive, got {omega}")));
    }
    let s = (t_f * omega).powi(-2);
    Ok([
        2520.0 * s,
        -12600.0 * s,
        22680.0 * s + 126.0,
        -17640.0 * s - 420.0,
        5040.0 * s + 540.0,
        -315.0,
        70.0,
    ])
}

/// `order`-th derivative in `u` of `Σ c_k u^(first_power + k)`.
fn polynomial_derivative(coefficients: &[f64], first_power: usize, order: usize, u: f64) -> f64 {
    let mut acc = 0.0;
    for (idx, c) in coefficients.iter().enumerate().rev() {
        let n = first_power + idx;
        if n < order {
            break;
        }
        let falling: f64 = (0..order).map(|k| (n - k) as f64).product();
        acc = acc * u + c * falling;
    }
    let lowest = first_power.max(order) - order;
    acc * u.powi(lowest as i32)
}

/// Ninth-degree path of the potential minimum along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialTrajectory {
    pub axis: Axis,
    pub d: f64,
    pub t_f: f64,
    pub omega: f64,
    /// `b_3..b_9`.
    pub b: [f64; 7],
    /// Equilibrium shift `-a_x/ω_x²` of the X axis; zero for Y.
    pub a_offset: f64,
}

impl PolynomialTrajectory {
    pub fn new(axis: Axis, d: f64, omega: f64, t_f: f64) -> Result<Self> {
        let b = sta_coefficients(omega, t_f)?;
        Ok(Self { axis, d, t_f, omega, b, a_offset: 0.0 })
    }

    pub fn with_offset(mut self, a_offset: f64) -> Self {
        self.a_offset = a_offset;
        self
    }

    /// Same coefficients executed over a different duration.
    pub fn retimed(mut self, t_f: f64) -> Result<Self> {
        check_duration(t_f)?;
        self.t_f = t_f;
        Ok(self)
    }

    /// Same coefficients with the distance scaled by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.d *= factor;
        self
    }

    /// `q_0` (order 0), `q̇_0` (1) or `q̈_0` (2) at time `t`.
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        if !(0.0..=self.t_f).contains(&t) {
            return Err(Error::OutOfWindow { t, t_f: self.t_f });
        }
        if order > 2 {
            return Err(Error::InvalidParameter(format!("derivative order {order} not supported")));
        }
        Ok(self.eval_clamped(t, order as usize))
    }

    /// Evaluation with `t` clamped into `[0, t_f]`.
    pub fn eval_clamped(&self, t: f64, order: usize) -> f64 {
        let u = (t / self.t_f).clamp(0.0, 1.0);
        self.d * polynomial_derivative(&self.b, 3, order, u) / self.t_f.powi(order as i32)
    }

    pub fn position(&self, t: f64) -> f64 {
        self.eval_clamped(t, 0)
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.eval_clamped(t, 1)
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        self.eval_clamped(t, 2)
    }

    /// Values at the six collocation times `j t_f / 7`, the control vector
    /// that reproduces this trajectory.
    pub fn collocation_values(&self) -> [f64; 6] {
        std::array::from_fn(|j| self.position((j + 1) as f64 * self.t_f / 7.0))
    }

    /// Largest |q̈_0| over `n` uniform samples.
    pub fn max_abs_acceleration(&self, n: usize) -> f64 {
        let n = n.max(2);
        (0..n)
            .map(|i| self.acceleration(self.t_f * i as f64 / (n - 1) as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Auxiliary classical path `q_c(t)` meeting the boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    pub axis: Axis,
    pub d: f64,
    pub t_f: f64,
    /// Coefficients of powers 5..9 of `t/t_f`, in units of `d`.
    pub c: [f64; 5],
}

pub fn classical_coefficients(axis: Axis, d: f64, t_f: f64) -> Result<ClassicalTrajectory> {
    check_duration(t_f)?;
    Ok(ClassicalTrajectory { axis, d, t_f, c: CLASSICAL_COEFFICIENTS })
}

impl ClassicalTrajectory {
    /// `order`-th time derivative of `q_c`, orders 0 through 4.
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        let u = (t / self.t_f).clamp(0.0, 1.0);
        self.d * polynomial_derivative(&self.c, 5, order, u) / self.t_f.powi(order as i32)
    }

    /// Inverse-engineered trap path `q_c + q̈_c/ω²` as powers 3..9 of `t/t_f`,
    /// in units of `d`.
    pub fn trap_path_coefficients(&self, omega: f64) -> [f64; 7] {
        let s = (self.t_f * omega).powi(-2);
        let mut out = [0.0; 7];
        for (idx, c) in self.c.iter().enumerate() {
            let n = idx + 5;
            out[n - 3] += c;
            out[n - 5] += (n * (n - 1)) as f64 * c * s;
        }
        out
    }
}

/// Residual of the forced-oscillator equation at `t`, written as right-hand
/// side minus left-hand side:
///
/// `-a_x - [q̈_c + ω²(q_c + offset - q_0)]`
///
/// with `offset` the trajectory's equilibrium shift. For the Y axis the
/// linear force is absent and `a_x` is ignored. When the X offset is set to
/// `-a_x/ω²` the residual vanishes identically; with a zero offset it is the
/// constant `-a_x`.
pub fn forced_oscillator_residual(
    traj: &PolynomialTrajectory,
    qc: &ClassicalTrajectory,
    a_x: f64,
    t: f64,
) -> Result<f64> {
    if traj.axis != qc.axis || traj.d != qc.d || traj.t_f != qc.t_f {
        return Err(Error::AxisMismatch);
    }
    if !(0.0..=traj.t_f).contains(&t) {
        return Err(Error::OutOfWindow { t, t_f: traj.t_f });
    }
    let w2 = traj.omega * traj.omega;
    let lhs = qc.eval(t, 2) + w2 * (qc.eval(t, 0) - traj.position(t));
    Ok(match traj.axis {
        Axis::X => -a_x - lhs - w2 * traj.a_offset,
        Axis::Y => -lhs,
    })
}

/// Frequency imbalance `Δf = q̇_0 k_L / π` sampled uniformly over `[0, t_f]`.
///
/// The boundary samples are the analytic zeros of the velocity.
pub fn aom_program(traj: &PolynomialTrajectory, k_l: f64, n_samples: usize) -> Result<Vec<(f64, f64)>> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n_samples}")));
    }
    let last = n_samples - 1;
    Ok((0..n_samples)
        .map(|i| {
            let t = if i == last { traj.t_f } else { traj.t_f * i as f64 / last as f64 };
            let df = if i == 0 || i == last { 0.0 } else { traj.velocity(t) * k_l / PI };
            (t, df)
        })
        .collect())
}

/// Lattice velocity produced by a frequency imbalance.
pub fn lattice_velocity(delta_f: f64, k_l: f64) -> f64 {
    PI * delta_f / k_l
}

/// Independent X and Y trajectories; diagonal transport is their superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPair {
    pub x: PolynomialTrajectory,
    pub y: PolynomialTrajectory,
}

impl TrajectoryPair {
    pub fn t_f(&self) -> f64 {
        self.x.t_f.max(self.y.t_f)
    }

    pub fn position(&self, t: f64) -> [f64; 2] {
        [self.x.position(t), self.y.position(t)]
    }

    pub fn velocity(&self, t: f64) -> [f64; 2] {
        [self.x.velocity(t), self.y.velocity(t)]
    }

    pub fn acceleration(&self, t: f64) -> [f64; 2] {
        [self.x.acceleration(t), self.y.acceleration(t)]
    }

    /// Largest |q̈_0| (vector norm) over `n` uniform samples.
    pub fn max_abs_acceleration(&self, n: usize) -> f64 {
        let n = n.max(2);
        let t_f = self.t_f();
        (0..n)
            .map(|i| {
                let a = self.acceleration(t_f * i as f64 / (n - 1) as f64);
                a[0].hypot(a[1])
            })
            .fold(0.0, f64::max)
    }
}

pub fn trajectory_2d(spec: &TransportSpec, hp: &HarmonicParams) -> Result<TrajectoryPair> {
    check_duration(spec.t_f)?;
    let x = PolynomialTrajectory::new(Axis::X, spec.d_x, hp.omega_x, spec.t_f)?
        .with_offset(hp.equilibrium()[0]);
    let y = PolynomialTrajectory::new(Axis::Y, spec.d_y, hp.omega_y, spec.t_f)?;
    Ok(TrajectoryPair { x, y })
}

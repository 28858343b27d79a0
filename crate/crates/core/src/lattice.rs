//! The adjustable family of 2D optical lattices.
//!
//! The potential is
//!
//! ```text
//! U(x, y) = -U_X sin²(kx) - U_Y cos²(ky) - U_X̄ cos²(kx + θ/2)
//!           - 2α √(U_X U_Y) sin(kx) cos(ky) cos φ
//! ```
//!
//! with depths quoted in recoil energies. Depending on the ratios of the
//! three depths this produces square, dimerized, honeycomb, 1D-chain and
//! checkerboard geometries. Around the origin the potential is expanded to
//! quadratic order, which yields the separable [`HarmonicParams`] used to
//! design transport trajectories.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::units::{self, recoil_energy, MASS};

/// One member of the lattice family. Depths are in units of E_R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    #[serde(rename = "u_x_er")]
    pub u_x: f64,
    #[serde(rename = "u_xbar_er")]
    pub u_xbar: f64,
    #[serde(rename = "u_y_er")]
    pub u_y: f64,
    #[serde(rename = "theta_rad")]
    pub theta: f64,
    #[serde(rename = "phi_rad")]
    pub phi: f64,
    pub alpha: f64,
    #[serde(default = "default_k_l")]
    pub k_l: f64,
}

fn default_k_l() -> f64 {
    1.0
}

/// Default beam visibility of the high-contrast regime.
pub const DEFAULT_ALPHA: f64 = 0.9;

impl LatticeParams {
    /// Depths in E_R with θ = φ = 0, α = 0.9 and k_L = 1.
    pub fn from_depths(u_x: f64, u_xbar: f64, u_y: f64) -> Self {
        Self { u_x, u_xbar, u_y, theta: 0.0, phi: 0.0, alpha: DEFAULT_ALPHA, k_l: 1.0 }
    }

    pub fn with_phases(mut self, theta: f64, phi: f64) -> Self {
        self.theta = theta;
        self.phi = phi;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn depths(&self) -> [f64; 3] {
        [self.u_x, self.u_xbar, self.u_y]
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.u_x, self.u_xbar, self.u_y, self.theta, self.phi, self.alpha, self.k_l]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("lattice parameters must be finite".into()));
        }
        if self.u_x < 0.0 || self.u_xbar < 0.0 || self.u_y < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lattice depths must be non-negative, got {:?}",
                self.depths()
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if self.k_l <= 0.0 {
            return Err(Error::InvalidParameter(format!("k_l must be positive, got {}", self.k_l)));
        }
        Ok(())
    }

    /// Multiplies the three depths by `factor`; phases and visibility are kept.
    pub fn scale_depths(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("depth factor must be positive, got {factor}")));
        }
        Ok(Self {
            u_x: self.u_x * factor,
            u_xbar: self.u_xbar * factor,
            u_y: self.u_y * factor,
            ..*self
        })
    }

    /// Depths converted to internal energy units.
    fn internal_depths(&self) -> (f64, f64, f64) {
        let e_r = recoil_energy(self.k_l);
        (self.u_x * e_r, self.u_xbar * e_r, self.u_y * e_r)
    }

    /// Amplitude of the sin(kx)cos(ky) interference term, internal units.
    fn cross_amplitude(&self) -> f64 {
        let (u_x, _, u_y) = self.internal_depths();
        2.0 * self.alpha * (u_x * u_y).sqrt() * self.phi.cos()
    }

    /// Potential in internal energy units (ħ = m = k_L = 1).
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let (u_x, u_xbar, u_y) = self.internal_depths();
        let k = self.k_l;
        let sx = (k * x).sin();
        let cy = (k * y).cos();
        let cb = (k * x + 0.5 * self.theta).cos();
        -u_x * sx * sx - u_y * cy * cy - u_xbar * cb * cb - self.cross_amplitude() * sx * cy
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let (u_x, u_xbar, u_y) = self.internal_depths();
        let k = self.k_l;
        let c = self.cross_amplitude();
        let (sx, cx) = (k * x).sin_cos();
        let (sy, cy) = (k * y).sin_cos();
        [
            k * (-u_x * (2.0 * k * x).sin() + u_xbar * (2.0 * k * x + self.theta).sin() - c * cx * cy),
            k * (u_y * (2.0 * k * y).sin() + c * sx * sy),
        ]
    }

    /// Hessian `[[∂xx, ∂xy], [∂xy, ∂yy]]`.
    pub fn hessian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let (u_x, u_xbar, u_y) = self.internal_depths();
        let k = self.k_l;
        let k2 = k * k;
        let c = self.cross_amplitude();
        let (sx, cx) = (k * x).sin_cos();
        let (sy, cy) = (k * y).sin_cos();
        let xx = k2
            * (-2.0 * u_x * (2.0 * k * x).cos() + 2.0 * u_xbar * (2.0 * k * x + self.theta).cos()
                + c * sx * cy);
        let yy = k2 * (2.0 * u_y * (2.0 * k * y).cos() + c * sx * cy);
        let xy = k2 * c * cx * sy;
        [[xx, xy], [xy, yy]]
    }

    /// Spatial period 2π/k_L of the full pattern along either axis.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.k_l
    }

    /// Shortest translation along x that maps the lattice onto itself.
    pub fn translation_period_x(&self) -> f64 {
        if self.cross_amplitude() == 0.0 {
            PI / self.k_l
        } else {
            self.period()
        }
    }

    pub fn translation_period_y(&self) -> f64 {
        self.translation_period_x()
    }

    /// Local minimum reached from `seed` by damped Newton iteration.
    pub fn find_minimum(&self, seed: [f64; 2]) -> Result<[f64; 2]> {
        const MAX_ITERATIONS: usize = 200;
        let tolerance = 1e-10 * recoil_energy(self.k_l) * self.k_l;
        let norm = |g: [f64; 2]| g[0].hypot(g[1]);
        let mut p = seed;
        for _ in 0..MAX_ITERATIONS {
            let g = self.gradient(p[0], p[1]);
            let g_norm = norm(g);
            if g_norm < tolerance {
                return Ok(p);
            }
            let dir = descent_direction(self.hessian(p[0], p[1]), g);
            let f0 = self.evaluate(p[0], p[1]);
            let slope = g[0] * dir[0] + g[1] * dir[1];
            let mut step = 1.0;
            let mut next = p;
            while step > 1e-14 {
                next = [p[0] + step * dir[0], p[1] + step * dir[1]];
                let sufficient = self.evaluate(next[0], next[1]) <= f0 + 1e-4 * step * slope;
                // near the minimum U stops resolving the decrease; the gradient still does
                if sufficient || norm(self.gradient(next[0], next[1])) < 0.5 * g_norm {
                    break;
                }
                step *= 0.5;
            }
            p = next;
        }
        Err(Error::NoConvergence { what: "lattice minimum search", iterations: MAX_ITERATIONS })
    }

    /// Minimum of the well closest to the origin, refined from a coarse scan.
    pub fn central_minimum(&self) -> Result<[f64; 2]> {
        let half = 0.5 * PI / self.k_l;
        let n = 64;
        let mut best = ([0.0, 0.0], f64::INFINITY);
        for i in 0..=n {
            for j in 0..=n {
                let x = -half + 2.0 * half * i as f64 / n as f64;
                let y = -half + 2.0 * half * j as f64 / n as f64;
                let v = self.evaluate(x, y);
                if v < best.1 - 1e-12 * v.abs() {
                    best = ([x, y], v);
                }
            }
        }
        self.find_minimum(best.0)
    }
}

fn descent_direction(h: [[f64; 2]; 2], g: [f64; 2]) -> [f64; 2] {
    let (a, b, d) = (h[0][0], h[0][1], h[1][1]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (low, high) = (mean - radius, mean + radius);
    let shift = if low > 1e-12 * high.abs().max(1.0) {
        0.0
    } else {
        -low + 0.1 * high.abs().max(1.0)
    };
    let (a, d) = (a + shift, d + shift);
    let det = a * d - b * b;
    [-(d * g[0] - b * g[1]) / det, -(-b * g[0] + a * g[1]) / det]
}

/// Evaluates the potential on every grid node (internal energy units).
///
/// The window must span whole lattice periods so that the periodic grid
/// sees a continuous potential.
pub fn evaluate_potential_batch(params: &LatticeParams, grid: &Grid2D) -> Result<Array2<f64>> {
    grid.check_commensurate(params.period())?;
    Ok(grid.sample(|x, y| params.evaluate(x, y)))
}

/// Quadratic expansion of the lattice around the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicParams {
    pub v_d0: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    pub a_x: f64,
}

impl HarmonicParams {
    /// V = -V_d0 + m a_x x + m/2 (ω_x² x² + ω_y² y²).
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        -self.v_d0
            + MASS * self.a_x * x
            + 0.5 * MASS * (self.omega_x * self.omega_x * x * x + self.omega_y * self.omega_y * y * y)
    }

    /// Minimum of the quadratic potential, shifted by the linear term.
    pub fn equilibrium(&self) -> [f64; 2] {
        [-self.a_x / (self.omega_x * self.omega_x), 0.0]
    }

    pub fn period_x(&self) -> f64 {
        units::oscillator_period(self.omega_x)
    }

    pub fn period_y(&self) -> f64 {
        units::oscillator_period(self.omega_y)
    }

    pub fn length_x(&self) -> f64 {
        units::oscillator_length(self.omega_x)
    }

    pub fn length_y(&self) -> f64 {
        units::oscillator_length(self.omega_y)
    }

    pub fn field(&self, grid: &Grid2D) -> Array2<f64> {
        grid.sample(|x, y| self.evaluate(x, y))
    }
}

/// Harmonic expansion of `params` around the origin.
pub fn harmonic_approximation(params: &LatticeParams) -> Result<HarmonicParams> {
    params.validate()?;
    let (u_x, u_xbar, u_y) = params.internal_depths();
    let k = params.k_l;
    // (2 U_X k²/m)(U_X̄/U_X cos θ - 1) with U_X cancelled, finite as U_X -> 0
    let omega_x_sq = 2.0 * k * k * (u_xbar * params.theta.cos() - u_x) / MASS;
    let omega_y_sq = 2.0 * u_y * k * k / MASS;
    if omega_x_sq <= 0.0 {
        return Err(Error::UnstableAxis { axis: 'x', omega_sq: omega_x_sq });
    }
    if omega_y_sq <= 0.0 {
        return Err(Error::UnstableAxis { axis: 'y', omega_sq: omega_y_sq });
    }
    let half_theta = 0.5 * params.theta;
    Ok(HarmonicParams {
        v_d0: u_y + u_xbar * half_theta.cos().powi(2),
        omega_x: omega_x_sq.sqrt(),
        omega_y: omega_y_sq.sqrt(),
        a_x: k * (u_xbar * params.theta.sin() - params.cross_amplitude()) / MASS,
    })
}

/// Named lattice geometries with the depth triples used for transport studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
    Dimerized,
    Honeycomb,
    #[serde(rename = "chains1d")]
    Chains1D,
    Checkerboard,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 5] = [
        LatticeKind::Honeycomb,
        LatticeKind::Square,
        LatticeKind::Chains1D,
        LatticeKind::Dimerized,
        LatticeKind::Checkerboard,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Dimerized => "dimerized",
            LatticeKind::Honeycomb => "honeycomb",
            LatticeKind::Chains1D => "chains1d",
            LatticeKind::Checkerboard => "checkerboard",
        }
    }

    /// Depths (U_X, U_X̄, U_Y) in E_R.
    pub fn depths(&self) -> [f64; 3] {
        match self {
            LatticeKind::Honeycomb => [200.0, 600.0, 200.0],
            LatticeKind::Square => [0.0, 200.0, 200.0],
            LatticeKind::Chains1D => [50.0, 1000.0, 200.0],
            LatticeKind::Dimerized => [200.0, 400.0, 200.0],
            LatticeKind::Checkerboard => [200.0, 0.0, 200.0],
        }
    }

    /// Checkerboard has no confining harmonic frequency along x at θ = 0.
    pub fn is_experimental(&self) -> bool {
        matches!(self, LatticeKind::Checkerboard)
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LatticeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown lattice preset '{s}'")))
    }
}

/// Preset parameters with θ = φ = 0 and α = 0.9.
pub fn preset(kind: LatticeKind) -> LatticeParams {
    let [u_x, u_xbar, u_y] = kind.depths();
    LatticeParams::from_depths(u_x, u_xbar, u_y)
}

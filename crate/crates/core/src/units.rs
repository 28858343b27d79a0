//! Internal unit system.
//!
//! All numerics run with ħ = m = k_L = 1. Energies are then measured in
//! units of 2 E_R, lengths in 1/k_L and times in m/(ħ k_L²). Values cross
//! the library boundary in recoil energies E_R, oscillator lengths l_x and
//! oscillator periods T_x; the helpers below are the only conversion points.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.0;
pub const MASS: f64 = 1.0;

/// Recoil energy ħ²k²/2m for wave number `k_l` in internal units.
pub fn recoil_energy(k_l: f64) -> f64 {
    HBAR * HBAR * k_l * k_l / (2.0 * MASS)
}

/// Recoil energy for the default wave number k_L = 1.
pub const RECOIL_ENERGY: f64 = 0.5;

pub fn from_recoil(e_r: f64) -> f64 {
    e_r * RECOIL_ENERGY
}

pub fn to_recoil(energy: f64) -> f64 {
    energy / RECOIL_ENERGY
}

/// Oscillation period 2π/ω.
pub fn oscillator_period(omega: f64) -> f64 {
    2.0 * PI / omega
}

/// Zero-point length √(ħ/2mω).
pub fn oscillator_length(omega: f64) -> f64 {
    (HBAR / (2.0 * MASS * omega)).sqrt()
}

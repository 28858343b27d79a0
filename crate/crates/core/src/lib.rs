//! Shortcut-to-adiabaticity transport of single atoms in adjustable 2D
//! optical lattices, simulated with a Fourier split-operator propagator in
//! the frame comoving with the lattice.
//!
//! Internal units: ħ = m = k_L = 1, so the recoil energy is 1/2.

pub mod error;
pub mod experiment;
pub mod fft;
pub mod grid;
pub mod ground_state;
pub mod lattice;
pub mod output;
pub mod propagator;
pub mod trajectory;
pub mod units;
pub mod wavefunction;

pub use error::{Error, ErrorClass, Result};
pub use experiment::{
    breakdown_time, fidelity, fidelity_curve, figure_config, reproduce_figure, robustness_sweep, run_transport,
    sweep_tf, GridSettings, LatticeSpec, Perturbation, SweepPoint, TransportConfig, TransportResult,
    TransportSetup,
};
pub use fft::{fft_forward, fft_inverse, Fft2};
pub use grid::Grid2D;
pub use ground_state::{energy_expectation, imaginary_time_evolve, GroundState, ItetConfig};
pub use lattice::{
    evaluate_potential_batch, harmonic_approximation, preset, HarmonicParams, LatticeKind, LatticeParams,
};
pub use propagator::{observables, Observables, Propagation, SplitOperator, StepRecord, StepperConfig};
pub use trajectory::{
    aom_program, classical_coefficients, forced_oscillator_residual, sta_coefficients, trajectory_2d, Axis,
    ClassicalTrajectory, PolynomialTrajectory, TrajectoryPair, TransportSpec,
};
pub use wavefunction::WaveFunction;

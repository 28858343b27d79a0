#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

/// Spectral second-derivative kinetic matrix `-½ d²/dx²` on `n` periodic
/// points, built from its cosine series rather than from an FFT.
pub fn kinetic_matrix_1d(n: usize, extent: f64) -> DMatrix<f64> {
    let dx = extent / n as f64;
    let k = |p: usize| {
        let m = if p < n.div_ceil(2) { p as f64 } else { p as f64 - n as f64 };
        2.0 * PI * m / extent
    };
    DMatrix::from_fn(n, n, |i, j| {
        let r = (i as f64 - j as f64) * dx;
        (0..n).map(|p| 0.5 * k(p) * k(p) * (k(p) * r).cos()).sum::<f64>() / n as f64
    })
}

/// Lowest eigenvalue of the discretized Hamiltonian by dense diagonalization.
pub fn dense_ground_energy(potential: &Array2<f64>, extent: [f64; 2]) -> f64 {
    let (n_x, n_y) = potential.dim();
    let t_x = kinetic_matrix_1d(n_x, extent[0]);
    let t_y = kinetic_matrix_1d(n_y, extent[1]);
    let dim = n_x * n_y;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n_x {
        for j in 0..n_y {
            let row = i * n_y + j;
            h[(row, row)] += potential[[i, j]];
            for jj in 0..n_y {
                h[(row, i * n_y + jj)] += t_y[(j, jj)];
            }
            for ii in 0..n_x {
                h[(row, ii * n_y + j)] += t_x[(i, ii)];
            }
        }
    }
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

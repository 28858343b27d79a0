use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// Complex amplitude field on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amplitudes: Array2<Complex64>,
    grid: Arc<Grid2D>,
}

impl WaveFunction {
    pub fn new(grid: Arc<Grid2D>, amplitudes: Array2<Complex64>) -> Result<Self> {
        grid.check_shape(&amplitudes)?;
        Ok(Self { amplitudes, grid })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: Arc<Grid2D>, f: F) -> Self {
        let (x, y) = (grid.x(), grid.y());
        let amplitudes = Array2::from_shape_fn(grid.shape(), |(i, j)| f(x[i], y[j]));
        Self { amplitudes, grid }
    }

    /// Normalized Gaussian `exp(-(x-x0)²/2σ_x² - (y-y0)²/2σ_y²)` carrying
    /// momentum `k0`.
    pub fn gaussian(grid: Arc<Grid2D>, center: [f64; 2], sigma: [f64; 2], k0: [f64; 2]) -> Result<Self> {
        if !(sigma[0] > 0.0 && sigma[1] > 0.0) {
            return Err(Error::InvalidParameter(format!("Gaussian widths must be positive, got {sigma:?}")));
        }
        let mut psi = Self::from_fn(grid, |x, y| {
            let (dx, dy) = (x - center[0], y - center[1]);
            let envelope = (-0.5 * (dx * dx / (sigma[0] * sigma[0]) + dy * dy / (sigma[1] * sigma[1]))).exp();
            Complex64::from_polar(envelope, k0[0] * x + k0[1] * y)
        });
        psi.normalize()?;
        Ok(psi)
    }

    /// Normalized constant state.
    pub fn uniform(grid: Arc<Grid2D>) -> Self {
        let value = 1.0 / (grid.extent()[0] * grid.extent()[1]).sqrt();
        Self::from_fn(grid, |_, _| Complex64::new(value, 0.0))
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &Array2<Complex64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array2<Complex64> {
        self.amplitudes
    }

    /// `∫|ψ|² dA` by rectangle quadrature.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sq().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DegenerateSeed);
        }
        let scale = 1.0 / norm;
        self.amplitudes.mapv_inplace(|c| c * scale);
        Ok(())
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// `⟨self|other⟩ = ∫ self* other dA`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let mut acc = Complex64::default();
        Zip::from(&self.amplitudes).and(&other.amplitudes).for_each(|a, b| acc += a.conj() * b);
        Ok(acc * self.grid.cell_area())
    }

    /// `L2` distance `‖self - other‖`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let mut acc = 0.0;
        Zip::from(&self.amplitudes).and(&other.amplitudes).for_each(|a, b| acc += (a - b).norm_sqr());
        Ok((acc * self.grid.cell_area()).sqrt())
    }

    pub fn density(&self) -> Array2<f64> {
        self.amplitudes.mapv(|c| c.norm_sqr())
    }

    /// Index of the node with the largest density.
    pub fn peak_index(&self) -> (usize, usize) {
        let mut best = ((0, 0), f64::MIN);
        for (idx, c) in self.amplitudes.indexed_iter() {
            if c.norm_sqr() > best.1 {
                best = (idx, c.norm_sqr());
            }
        }
        best.0
    }
}

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Unitary 2D discrete Fourier transform on an `(n_x, n_y)` row-major field.
///
/// Both directions carry a factor `1/√(n_x n_y)`, so Parseval holds with
/// unit weight. Plans are shared; scratch buffers are per instance.
#[derive(Clone)]
pub struct Fft2 {
    n_x: usize,
    n_y: usize,
    forward_x: Arc<dyn Fft<f64>>,
    forward_y: Arc<dyn Fft<f64>>,
    inverse_x: Arc<dyn Fft<f64>>,
    inverse_y: Arc<dyn Fft<f64>>,
    transposed: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("n_x", &self.n_x).field("n_y", &self.n_y).finish()
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl Fft2 {
    pub fn new(n_x: usize, n_y: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward_x = planner.plan_fft_forward(n_x);
        let forward_y = planner.plan_fft_forward(n_y);
        let inverse_x = planner.plan_fft_inverse(n_x);
        let inverse_y = planner.plan_fft_inverse(n_y);
        let scratch_len = [&forward_x, &forward_y, &inverse_x, &inverse_y]
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Self {
            n_x,
            n_y,
            forward_x,
            forward_y,
            inverse_x,
            inverse_y,
            transposed: vec![Complex64::default(); n_x * n_y],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    pub fn forward(&mut self, field: &mut Array2<Complex64>) -> Result<()> {
        self.transform(field, Direction::Forward)
    }

    pub fn inverse(&mut self, field: &mut Array2<Complex64>) -> Result<()> {
        self.transform(field, Direction::Inverse)
    }

    fn transform(&mut self, field: &mut Array2<Complex64>, direction: Direction) -> Result<()> {
        let (n_x, n_y) = (self.n_x, self.n_y);
        if field.dim() != (n_x, n_y) {
            return Err(Error::ShapeMismatch { expected: (n_x, n_y), found: field.dim() });
        }
        if !field.is_standard_layout() {
            *field = field.as_standard_layout().into_owned();
        }
        let (along_x, along_y) = match direction {
            Direction::Forward => (&self.forward_x, &self.forward_y),
            Direction::Inverse => (&self.inverse_x, &self.inverse_y),
        };
        let data = field.as_slice_mut().expect("standard layout");

        // rows are contiguous along y; rustfft processes every chunk
        along_y.process_with_scratch(data, &mut self.scratch);

        for i in 0..n_x {
            for j in 0..n_y {
                self.transposed[j * n_x + i] = data[i * n_y + j];
            }
        }
        along_x.process_with_scratch(&mut self.transposed, &mut self.scratch);

        let scale = 1.0 / ((n_x * n_y) as f64).sqrt();
        for j in 0..n_y {
            for i in 0..n_x {
                data[i * n_y + j] = self.transposed[j * n_x + i] * scale;
            }
        }
        Ok(())
    }
}

/// Allocating forward transform of `field`.
pub fn fft_forward(field: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (n_x, n_y) = field.dim();
    let mut out = field.as_standard_layout().into_owned();
    Fft2::new(n_x, n_y).forward(&mut out)?;
    Ok(out)
}

/// Allocating inverse transform of `spectrum`.
pub fn fft_inverse(spectrum: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (n_x, n_y) = spectrum.dim();
    let mut out = spectrum.as_standard_layout().into_owned();
    Fft2::new(n_x, n_y).inverse(&mut out)?;
    Ok(out)
}

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Uniform periodic grid over a rectangular window.
///
/// Node `i` along x sits at `center_x - extent_x / 2 + i * dx`. Wave numbers
/// follow FFT ordering: `k[0] = 0`, positive frequencies first, then the
/// negative ones (the Nyquist entry of an even grid is taken negative).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    n_x: usize,
    n_y: usize,
    extent_x: f64,
    extent_y: f64,
    center: [f64; 2],
    x: Vec<f64>,
    y: Vec<f64>,
    k_x: Vec<f64>,
    k_y: Vec<f64>,
}

fn nodes(n: usize, extent: f64, center: f64) -> Vec<f64> {
    let dx = extent / n as f64;
    (0..n).map(|i| center - 0.5 * extent + i as f64 * dx).collect()
}

fn wave_numbers(n: usize, extent: f64) -> Vec<f64> {
    let dk = 2.0 * PI / extent;
    (0..n)
        .map(|i| {
            let signed = if i < n.div_ceil(2) { i as isize } else { i as isize - n as isize };
            signed as f64 * dk
        })
        .collect()
}

impl Grid2D {
    pub fn new(n_x: usize, n_y: usize, extent_x: f64, extent_y: f64) -> Result<Self> {
        Self::centered(n_x, n_y, extent_x, extent_y, [0.0, 0.0])
    }

    pub fn centered(
        n_x: usize,
        n_y: usize,
        extent_x: f64,
        extent_y: f64,
        center: [f64; 2],
    ) -> Result<Self> {
        if n_x < 2 || n_y < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points per axis, got {n_x}x{n_y}"
            )));
        }
        if !(extent_x > 0.0 && extent_y > 0.0 && extent_x.is_finite() && extent_y.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid extents must be positive, got {extent_x} x {extent_y}"
            )));
        }
        Ok(Self {
            n_x,
            n_y,
            extent_x,
            extent_y,
            center,
            x: nodes(n_x, extent_x, center[0]),
            y: nodes(n_y, extent_y, center[1]),
            k_x: wave_numbers(n_x, extent_x),
            k_y: wave_numbers(n_y, extent_y),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self) -> [f64; 2] {
        [self.extent_x, self.extent_y]
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn dx(&self) -> f64 {
        self.extent_x / self.n_x as f64
    }

    pub fn dy(&self) -> f64 {
        self.extent_y / self.n_y as f64
    }

    /// Quadrature weight dx·dy.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn k_x(&self) -> &[f64] {
        &self.k_x
    }

    pub fn k_y(&self) -> &[f64] {
        &self.k_y
    }

    /// Smallest nonzero wave number along either axis.
    pub fn min_wave_number(&self) -> f64 {
        (2.0 * PI / self.extent_x).min(2.0 * PI / self.extent_y)
    }

    /// Samples `f(x, y)` at every node.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Array2<f64> {
        Array2::from_shape_fn((self.n_x, self.n_y), |(i, j)| f(self.x[i], self.y[j]))
    }

    /// |k|² at every spectral node.
    pub fn k_squared(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n_x, self.n_y), |(i, j)| {
            self.k_x[i] * self.k_x[i] + self.k_y[j] * self.k_y[j]
        })
    }

    /// Fails unless both window extents are whole multiples of `period`.
    pub fn check_commensurate(&self, period: f64) -> Result<()> {
        for (axis, extent) in [('x', self.extent_x), ('y', self.extent_y)] {
            let cells = extent / period;
            if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) || cells.round() < 1.0 {
                return Err(Error::NonCommensurateGrid { axis, extent, period });
            }
        }
        Ok(())
    }

    pub fn check_shape<T>(&self, field: &Array2<T>) -> Result<()> {
        let found = field.dim();
        if found != self.shape() {
            return Err(Error::ShapeMismatch { expected: self.shape(), found });
        }
        Ok(())
    }
}

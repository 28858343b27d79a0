//! CSV artifacts. Comma delimiter, `.` decimal point, 17 significant digits.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::units;

/// Locale-independent float text with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

pub fn write_rows<W, R, I>(writer: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    R: AsRef<[f64]>,
    I: IntoIterator<Item = R>,
{
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(header).map_err(io_error)?;
    for row in rows {
        csv.write_record(row.as_ref().iter().map(|v| format_float(*v))).map_err(io_error)?;
    }
    csv.flush().map_err(io_error)
}

/// Potential field as `x, y, U` rows, `U` in recoil energies.
pub fn write_field<W: Write>(writer: W, grid: &Grid2D, field: &ndarray::Array2<f64>, column: &str) -> Result<()> {
    grid.check_shape(field)?;
    write_rows(
        writer,
        &["x", "y", column],
        field.indexed_iter().map(|((i, j), v)| [grid.x()[i], grid.y()[j], *v]),
    )
}

pub fn write_potential<W: Write>(writer: W, grid: &Grid2D, potential: &ndarray::Array2<f64>) -> Result<()> {
    write_field(writer, grid, &potential.mapv(units::to_recoil), "U")
}

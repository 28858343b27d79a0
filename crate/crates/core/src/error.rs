use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The requested physical setup is invalid or has no confining minimum.
    Physics,
    /// A numerical procedure failed to converge or degenerated.
    Numerical,
    /// Writing an artifact failed.
    Io,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("window extent {extent} along {axis} is not an integer multiple of the lattice period {period}")]
    NonCommensurateGrid { axis: char, extent: f64, period: f64 },
    #[error("no confining minimum along {axis}: squared frequency {omega_sq}")]
    UnstableAxis { axis: char, omega_sq: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("transport duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("time {t} lies outside the transport window [0, {t_f}]")]
    OutOfWindow { t: f64, t_f: f64 },
    #[error("trajectory and classical path do not describe the same axis and transport")]
    AxisMismatch,
    #[error("field shape {found:?} does not match grid shape {expected:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("adaptive step {dt} fell below the floor {floor}")]
    StepUnderflow { dt: f64, floor: f64 },
    #[error("seed state has vanishing overlap with its imaginary-time iterate")]
    DegenerateSeed,
    #[error("wave functions are defined on different grids")]
    GridMismatch,
    #[error("fidelity curve never crosses the threshold {threshold}")]
    NoBracket { threshold: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NoConvergence { .. }
            | Error::StepUnderflow { .. }
            | Error::DegenerateSeed
            | Error::NoBracket { .. } => ErrorClass::Numerical,
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Physics,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

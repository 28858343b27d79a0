//! Run configuration files.

use std::path::Path;

use latticeport::experiment::{DEFAULT_BREAKDOWN_THRESHOLD, FIGURE_TF_GRID_TX};
use latticeport::{LatticeKind, LatticeSpec, Perturbation, TransportConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub transport: TransportConfig,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub robustness: RobustnessSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSettings {
    pub t_f_tx: Vec<f64>,
    pub breakdown_threshold: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { t_f_tx: FIGURE_TF_GRID_TX.to_vec(), breakdown_threshold: DEFAULT_BREAKDOWN_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobustnessSettings {
    pub perturbation: Perturbation,
    pub magnitudes_pct: Vec<f64>,
}

impl Default for RobustnessSettings {
    fn default() -> Self {
        Self { perturbation: Perturbation::DepthErrorPct, magnitudes_pct: vec![-5.0, -1.0, 0.0, 1.0, 5.0] }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut transport = TransportConfig::new(LatticeSpec::Preset(LatticeKind::Honeycomb));
        transport.distance_x_lx = 100.0;
        Self { transport, sweep: SweepSettings::default(), robustness: RobustnessSettings::default() }
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid: Option<(usize, usize)>,
    pub rel_tol: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)
            }
            None => Ok(Self::default()),
        }
    }

    pub fn apply(&mut self, overrides: Overrides) {
        if let Some((n_x, n_y)) = overrides.grid {
            self.transport.grid.n_x = n_x;
            self.transport.grid.n_y = n_y;
        }
        if let Some(tol) = overrides.rel_tol {
            self.transport.stepper.rel_tol = tol;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.transport.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let t = &self.sweep.t_f_tx;
        if t.is_empty() || t.iter().any(|v| !(*v > 0.0 && v.is_finite())) || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("sweep.t_f_tx must be positive and strictly ascending".into()));
        }
        let threshold = self.sweep.breakdown_threshold;
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(CliError::Config(format!("sweep.breakdown_threshold must lie in (0, 1), got {threshold}")));
        }
        let m = &self.robustness.magnitudes_pct;
        if m.is_empty() || m.iter().any(|v| !v.is_finite() || *v <= -100.0) {
            return Err(CliError::Config("robustness.magnitudes_pct must be finite and above -100".into()));
        }
        Ok(())
    }

    /// Resolved configuration with every default filled in; feeding it back
    /// reproduces the run.
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected <nx>x<ny>, got '{s}'"))?;
    let n_x = a.trim().parse().map_err(|_| format!("bad n_x in '{s}'"))?;
    let n_y = b.trim().parse().map_err(|_| format!("bad n_y in '{s}'"))?;
    Ok((n_x, n_y))
}

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Report;
use crate::config::{parse_grid, Overrides, RunConfig};
use crate::error::CliError;

/// Shortcut-to-adiabaticity atom transport in 2D optical lattices.
#[derive(Debug, Parser)]
#[command(name = "latticeport", version)]
struct Cli {
    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Directory for CSV files and the config sidecar.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Grid size as <nx>x<ny>, overriding the config.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Relative tolerance of the adaptive stepper, overriding the config.
    #[arg(long)]
    tol: Option<f64>,
}

impl Output {
    fn overrides(&self) -> Overrides {
        Overrides { grid: self.grid, rel_tol: self.tol }
    }
}

#[derive(Debug, Args)]
struct Run {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

impl Run {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = RunConfig::load(self.config.as_deref())?;
        config.apply(self.output.overrides());
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List lattice presets with their oscillator scales.
    Presets,
    /// Ground state density, potential and energy.
    GroundState(Run),
    /// Designed trajectory and AOM detuning program.
    Trajectory(Run),
    /// One transport run at the configured duration.
    Transport(Run),
    /// Fidelity against transport duration.
    Sweep(Run),
    /// Fidelity under a parameter mismatch.
    Robustness(Run),
    /// Fidelity curve of one figure panel.
    Figure {
        #[arg(long, value_parser = clap::value_parser!(u8).range(5..=8))]
        fig: u8,
        #[arg(long)]
        panel: char,
        /// Transport distance in l_x (100 or 400).
        #[arg(long, default_value_t = 100)]
        distance: u32,
        #[command(flatten)]
        output: Output,
    },
}

fn write_report(out: &Path, report: &Report) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    for artifact in &report.artifacts {
        std::fs::write(out.join(&artifact.name), &artifact.contents)?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    }
    let (out, report) = match &cli.command {
        Command::Presets => {
            for line in commands::presets() {
                println!("{line}");
            }
            return Ok(());
        }
        Command::GroundState(run) => (&run.output.out, commands::ground_state(&run.resolve()?)?),
        Command::Trajectory(run) => (&run.output.out, commands::trajectory(&run.resolve()?)?),
        Command::Transport(run) => (&run.output.out, commands::transport(&run.resolve()?)?),
        Command::Sweep(run) => (&run.output.out, commands::sweep(&run.resolve()?)?),
        Command::Robustness(run) => (&run.output.out, commands::robustness(&run.resolve()?)?),
        Command::Figure { fig, panel, distance, output } => {
            let config = commands::figure_run_config(*fig, *panel, *distance, output.overrides())?;
            (&output.out, commands::figure(&config, *fig, *panel, *distance)?)
        }
    };
    write_report(out, &report)?;
    for line in &report.summary {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

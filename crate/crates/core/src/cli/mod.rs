//! Command-line front end for the `gds` binary.

pub mod commands;
pub mod model;
pub mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::thermal::DEFAULT_AUDIT_TOL;

/// Environment variable overriding the relative audit tolerance.
pub const TOL_ENV: &str = "GDS_THERMO_TOL";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn semantic(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::input(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "gds", version, about = "Gaussian dynamical semigroups: build, evolve and audit thermalizing noise")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// Seed for any randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel commands.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize detailed-balance noise and Lindblad vectors for a model.
    Build {
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate mean and covariance; writes a CSV trajectory.
    #[command(allow_negative_numbers = true)]
    Evolve {
        model: PathBuf,
        /// `vacuum`, `thermal`, or a JSON file holding a 2n×2n matrix.
        #[arg(long, default_value = "vacuum")]
        v0: String,
        /// Initial mean as comma-separated values.
        #[arg(long)]
        mean0: Option<String>,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = crate::moments::DEFAULT_DT)]
        dt: f64,
        /// Write every k-th step.
        #[arg(long, default_value_t = 100)]
        every: usize,
        #[arg(long)]
        allow_nonstationary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a model or an explicit (D, C, V) file for thermal equilibrium.
    Audit {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate thermal quantities over a range of inverse temperatures.
    Sweep {
        model: PathBuf,
        /// `lo,hi`.
        #[arg(long)]
        beta_range: String,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Linear instead of logarithmic spacing.
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare against the truncated Fock-space master equation.
    #[command(allow_negative_numbers = true)]
    Oracle {
        model: PathBuf,
        #[arg(long, default_value_t = 40)]
        cutoff: usize,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Coherent amplitudes as `re,im` per mode, separated by `;`.
        #[arg(long)]
        alpha: Option<String>,
        /// Allow two modes.
        #[arg(long)]
        experimental: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random detailed-balance model drawn from `--seed`.
    Sample {
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Relative tolerance from the environment, or the library default.
pub fn base_tolerance() -> Result<f64, CliError> {
    match std::env::var(TOL_ENV) {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(CliError::input(format!("{TOL_ENV}: expected a positive number, got `{s}`"))),
        },
        Err(_) => Ok(DEFAULT_AUDIT_TOL),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code().clamp(0, 255) as u8;
        }
    };
    let echo = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match commands::dispatch(&cli, echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

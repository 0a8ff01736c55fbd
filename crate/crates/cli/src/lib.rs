//! Front end for the `quatsig` binary: argument definitions, config-file
//! resolution and the three subcommands.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quatsig_core::{BeamError, CurveError, FilterError, GradError, SignalError};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_beamform, cmd_gradcheck, cmd_predict};
pub use config::{ConfigFile, DoaList};
pub use report::RunReport;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Beam(#[from] BeamError),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error("{failed} check(s) failed: {names}")]
    ChecksFailed { failed: usize, names: String },
}

impl CliError {
    /// 1 for numeric failures, 2 for usage and input problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Signal(_) | Self::Curve(_) | Self::Io { .. } => EXIT_USAGE,
            Self::Filter(e) | Self::Beam(BeamError::Run { source: e, .. }) => match e {
                FilterError::Config(_) | FilterError::SeriesTooShort { .. } => EXIT_USAGE,
                _ => EXIT_FAILURE,
            },
            Self::Beam(_) => EXIT_USAGE,
            Self::Grad(GradError::InvalidStep(_)) => EXIT_USAGE,
            Self::Grad(_) | Self::ChecksFailed { .. } => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "quatsig",
    version,
    about = "Quaternion adaptive filtering experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the randomized algebra, gradient and update-rule checks.
    Gradcheck(GradcheckArgs),
    /// Multi-step prediction of a 3-D velocity series with QLMS/AQLMS.
    Predict(PredictArgs),
    /// Monte-Carlo QLMS beamforming with a crossed-dipole array.
    Beamform(BeamformArgs),
}

#[derive(Debug, Args, Default)]
pub struct GradcheckArgs {
    /// Random trials per check.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base finite-difference step.
    #[arg(long)]
    pub h0: Option<f64>,
    /// key=value config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Qlms,
    Aqlms,
    Both,
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args, Default)]
pub struct PredictArgs {
    /// Velocity CSV (`t,vx,vy,vz`).
    #[arg(long, conflicts_with = "synth")]
    pub input: Option<PathBuf>,
    /// Use a synthetic wind-like series instead of a file.
    #[arg(long)]
    pub synth: bool,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Filter length.
    #[arg(long)]
    pub len: Option<usize>,
    /// Prediction step.
    #[arg(long)]
    pub step: Option<usize>,
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Length of the synthetic series.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct BeamformArgs {
    #[arg(long)]
    pub sensors: Option<usize>,
    /// Element spacing in wavelengths.
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub snapshots: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Desired-signal SNR in dB.
    #[arg(long)]
    pub snr: Option<f64>,
    /// Signal-to-interference ratio in dB, per interferer.
    #[arg(long)]
    pub sir: Option<f64>,
    /// Signed interferer DOAs in degrees, e.g. `30,-20`.
    #[arg(long, allow_hyphen_values = true)]
    pub interferers: Option<DoaList>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

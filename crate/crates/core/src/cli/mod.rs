//! Command-line front end.
//!
//! Every subcommand reads an [`ExperimentConfig`] (TOML file via `--config`,
//! overridden by flags) and prints CSV or JSON on stdout. Numbers are printed
//! with 17 significant digits. Exit codes: 0 success, 2 validation failure,
//! 3 failed acceptance check in `selftest`.

pub mod commands;
pub mod config;
pub mod format;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{ExperimentConfig, OutputFormat};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{failed} acceptance check(s) failed")]
    Acceptance { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 1,
            CliError::Acceptance { .. } => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "weakmeas", version, about = "Repeated weak measurements on a single copy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one trajectory and report steps, y_M and the terminal state.
    Trajectory(ExperimentArgs),
    /// Run an ensemble of trajectories; prints the y_M histogram.
    Ensemble {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Also write the JSON summary to this file.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Tabulate the analytic distribution of the trajectory average y_M.
    Ydist {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Grid points (default 2048).
        #[arg(long)]
        points: Option<usize>,
    },
    /// Disturbance as a function of the statistical error epsilon.
    Disturbance {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 1e-3)]
        eps_min: f64,
        #[arg(long, default_value_t = 1e3)]
        eps_max: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
    },
    /// Saturation of the mean outcome under an outcome cutoff |p| <= f Δ_p.
    Saturation {
        /// Cutoffs f (comma separated).
        #[arg(long, value_delimiter = ',')]
        f: Vec<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Check that the POVM elements integrate to the identity.
    PovmCheck {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = commands::DEFAULT_POVM_POINTS)]
        points: usize,
    },
    /// Weak repetitions needed to match the error of M_s strong measurements.
    Resources {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Spread ΔS of the observable; defaults to the configured state's.
        #[arg(long)]
        delta_s: Option<f64>,
        /// Number of strong measurements M_s.
        #[arg(long, default_value_t = 1.0)]
        strong_repetitions: f64,
    },
    /// Run the full acceptance suite; exits 3 if any check fails.
    Selftest,
}

/// Experiment flags shared by the subcommands. Flags override the config
/// file; `master_seed` falls back to `$SEED`, then 0.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Eigenvalues of the observable (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub spectrum: Option<Vec<f64>>,
    /// One complex amplitude as RE,IM; repeat once per eigenvalue.
    #[arg(long = "amplitude", allow_hyphen_values = true)]
    pub amplitudes: Vec<String>,
    /// Born weights |α_i|² with zero phases (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub probabilities: Option<Vec<f64>>,
    #[arg(long)]
    pub delta_p: Option<f64>,
    /// Fixed number of repetitions M (disables early stopping).
    #[arg(long)]
    pub steps: Option<u64>,
    /// Step cap for runs that stop on convergence.
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub trajectories: Option<u64>,
    #[arg(long = "seed")]
    pub master_seed: Option<u64>,
    #[arg(long)]
    pub convergence_tol: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Worker threads for ensembles (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

impl ExperimentArgs {
    /// Flags, then config file, then `$SEED`.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let amplitudes = if self.amplitudes.is_empty() {
            None
        } else {
            Some(
                self.amplitudes
                    .iter()
                    .map(|s| parse_pair(s))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        };
        let flags = ExperimentConfig {
            spectrum: self.spectrum.clone(),
            amplitudes,
            probabilities: self.probabilities.clone(),
            delta_p: self.delta_p,
            steps: self.steps,
            max_steps: self.max_steps,
            trajectories: self.trajectories,
            master_seed: self.master_seed,
            convergence_tol: self.convergence_tol,
            bins: self.bins,
            threads: self.threads,
            format: self.format,
        };
        let file = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let mut cfg = flags.or(file);
        if cfg.master_seed.is_none() {
            if let Ok(v) = std::env::var("SEED") {
                let seed = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Validation(format!("SEED must be an unsigned integer, got {v:?}")))?;
                cfg.master_seed = Some(seed);
            }
        }
        Ok(cfg)
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::Validation(format!("amplitude must be RE,IM, got {s:?}"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok([
        re.trim().parse().map_err(|_| bad())?,
        im.trim().parse().map_err(|_| bad())?,
    ])
}

/// Executes a parsed command line, writing its output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match cli.command {
        Command::Trajectory(exp) => commands::trajectory(&exp.resolve()?)?,
        Command::Ensemble { exp, summary } => commands::ensemble(&exp.resolve()?, summary.as_deref())?,
        Command::Ydist { exp, points } => commands::ydist(&exp.resolve()?, points)?,
        Command::Disturbance {
            exp,
            eps_min,
            eps_max,
            points,
        } => commands::disturbance(&exp.resolve()?, eps_min, eps_max, points)?,
        Command::Saturation { f, format } => {
            let fs = if f.is_empty() {
                commands::DEFAULT_SATURATION_GRID.to_vec()
            } else {
                f
            };
            commands::saturation(&fs, format)?
        }
        Command::PovmCheck { exp, points } => commands::povm_check(&exp.resolve()?, points)?,
        Command::Resources {
            exp,
            delta_s,
            strong_repetitions,
        } => commands::resources(&exp.resolve()?, delta_s, strong_repetitions)?,
        Command::Selftest => {
            let outcomes = crate::acceptance::run_all(&mut |o| {
                let _ = writeln!(out, "{o}");
                let _ = out.flush();
            });
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            writeln!(
                out,
                "{} of {} acceptance checks passed",
                outcomes.len() - failed,
                outcomes.len()
            )?;
            if failed > 0 {
                return Err(CliError::Acceptance { failed });
            }
            return Ok(());
        }
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

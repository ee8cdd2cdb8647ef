//! Front end for `randers-core`: configuration handling and the `measure`,
//! `verify`, `optimize`, `volume` and `jacobi` subcommands.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;

pub use config::{RawConfig, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "randers",
    version,
    about = "Isoperimetric toolkit for Randers planes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (`section.key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized checks; overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key=value`, applied after the config file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Randers length and the four weighted areas of the configured curve.
    Measure,
    /// Check the five sufficiency conditions on the configured curve.
    Verify,
    /// Maximize area at fixed Randers length from the configured curve.
    Optimize,
    /// Volume factors f(b) by quadrature, closed form and definition.
    Volume,
    /// Conjugate-point determinant along a circle.
    Jacobi,
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONDITION_FAILED: u8 = 1;
    pub const INVALID_INPUT: u8 = 2;
    pub const INCONCLUSIVE: u8 = 3;
    pub const NOT_CONVERGED: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] randers_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use randers_core::Error as E;
        match self {
            CliError::Core(E::Tolerance(_) | E::NotPositiveDefinite { .. }) => exit::INCONCLUSIVE,
            _ => exit::INVALID_INPUT,
        }
    }
}

/// What a command printed and the exit code it asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub exit: u8,
}

/// Loads the configuration, applies overrides and runs the subcommand.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut raw = match &cli.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    for o in &cli.overrides {
        raw.apply_override(o)?;
    }
    if let Some(seed) = cli.seed {
        raw.apply_override(&format!("run.seed={seed}"))?;
    }
    let rc = RunConfig::from_raw(&raw)?;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Measure => commands::measure(&rc, out),
        Command::Verify => commands::verify(&rc, out),
        Command::Optimize => commands::optimize(&rc, out),
        Command::Volume => commands::volume(&rc, out),
        Command::Jacobi => commands::jacobi(&rc, out),
    }
}

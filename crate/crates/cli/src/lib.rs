//! Batch front-end for `framelab_core`: JSON configuration, data ingestion,
//! analyses and report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::Parser;
use framelab_core::Geometry;
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

pub use config::{Command, Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] framelab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub(crate) fn config(e: framelab_core::Error) -> CliError {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

/// Exit code for certificate violations under `--assert`.
pub const VIOLATION_EXIT: i32 = 1;

#[derive(Debug)]
pub struct Outcome {
    pub violations: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

/// Runs one command; relative paths in the config resolve against `base`.
pub fn run(command: Command, config: RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let config = config.resolve(command)?;
    let dir = base.join(&config.out);
    let mut out = output::Artifacts::create(&dir)?;
    let violations = commands::run(&config, base, &mut out)?;
    Ok(Outcome {
        violations,
        artifacts: out.written,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "framelab",
    version,
    about = "Frame-bound certificates for irregular Gabor and wavelet systems"
)]
pub struct Cli {
    pub command: Command,
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with status 1 when a certificate is violated.
    #[arg(long)]
    pub assert: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_geometry)]
    pub geometry: Option<Geometry>,
}

fn parse_geometry(s: &str) -> Result<Geometry, String> {
    s.parse().map_err(|e: framelab_core::Error| e.to_string())
}

/// Runs the parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let (config, base) = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => (c, path.parent().map(Path::to_path_buf).unwrap_or_default()),
            Err(e) => {
                eprintln!("framelab: {e}");
                return e.exit_code();
            }
        },
        None => (RunConfig::default(), PathBuf::new()),
    };
    let mut config = config;
    config.apply(&Overrides {
        geometry: cli.geometry,
        seed: cli.seed,
        out: cli.out.clone(),
    });
    // Flag paths are relative to the working directory, config paths to the file.
    if let Some(out) = &cli.out {
        config.out = std::path::absolute(out).unwrap_or_else(|_| out.clone());
    }
    match run(cli.command, config, &base) {
        Ok(outcome) => {
            for path in &outcome.artifacts {
                println!("{}", path.display());
            }
            for v in &outcome.violations {
                eprintln!("violation: {v}");
            }
            if cli.assert && !outcome.violations.is_empty() {
                VIOLATION_EXIT
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("framelab: {e}");
            e.exit_code()
        }
    }
}

//! Batch driver for the decaylab library: config parsing, subcommand
//! dispatch and CSV artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigError;

#[derive(Debug, Parser)]
#[command(
    name = "decaylab",
    version,
    about = "Decay of a discrete state coupled to a continuum"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file with `section.key = value` lines.
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` assignment; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the spectral density.
    Spectral(Common),
    /// Evaluate the self-energy along a horizontal line.
    Selfenergy(Common),
    /// Locate resonance poles.
    Poles(Common),
    /// Survival amplitude by a chosen method.
    Survival {
        #[command(flatten)]
        common: Common,
        /// numeric, closed, pole_cut or oracle.
        #[arg(long)]
        method: Option<String>,
    },
    /// Continuum wave packet coefficients.
    Packet(Common),
    /// Two-surface wave-packet simulation.
    Twosurface(Common),
    /// Check partitioned resolvent blocks against direct inversion.
    VerifyPartition(Common),
    /// Survival amplitude of a discretized model by exact diagonalization.
    OracleSurvival(Common),
    /// RMS and maximum deviation between two survival CSVs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit status for an error: numerical failures map to 3, everything else to 2.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<decaylab::Error>() {
            return if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_NUMERICAL
            };
        }
        if cause.is::<ConfigError>() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_VALIDATION
}

pub fn execute(cli: &Cli) -> anyhow::Result<commands::Report> {
    use commands::*;
    let load = |c: &Common| load_config(c.config.as_deref(), &c.set);
    match &cli.command {
        Command::Spectral(c) => spectral(&load(c)?, c.out.as_deref()),
        Command::Selfenergy(c) => selfenergy(&load(c)?, c.out.as_deref()),
        Command::Poles(c) => poles(&load(c)?, c.out.as_deref()),
        Command::Survival { common, method } => {
            survival(&load(common)?, common.out.as_deref(), method.as_deref())
        }
        Command::Packet(c) => packet(&load(c)?, c.out.as_deref()),
        Command::Twosurface(c) => twosurface(&load(c)?, c.out.as_deref()),
        Command::VerifyPartition(c) => verify_partition(&load(c)?, c.out.as_deref()),
        Command::OracleSurvival(c) => oracle_survival(&load(c)?, c.out.as_deref()),
        Command::Compare { a, b, out } => compare(a, b, out.as_deref()),
    }
}

/// Parses `args`, runs the subcommand and returns the exit status.
pub fn dispatch<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok(r) => {
            for l in &r.lines {
                println!("{l}");
            }
            println!("artifacts in {}", r.dir.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

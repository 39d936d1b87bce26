//! `hhgq`: reproducible runs of the simulator, the coincidence analysis and
//! the model fit. Every command writes JSON results carrying a provenance
//! block and CSV tables for plotting.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod error;
pub mod io;
pub mod provenance;

pub use error::{CliError, Result};
pub use provenance::Provenance;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "hhgq", version, about = "Photon statistics of pulsed high-harmonic light")]
pub struct Cli {
    /// JSON configuration for the command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a time-tag file and its truth sidecar.
    Simulate,
    /// Two-fold correlation from one or more tag files.
    AnalyzeG2 {
        #[arg(required = true)]
        tagfiles: Vec<PathBuf>,
    },
    /// Three-fold correlation from one or more tag files.
    AnalyzeG3 {
        #[arg(required = true)]
        tagfiles: Vec<PathBuf>,
    },
    /// Auto- and cross-correlations of two beams and the R parameter.
    Csi {
        #[arg(required = true)]
        tagfiles: Vec<PathBuf>,
    },
    /// Fit squeezer-distribution hyperparameters to a data CSV.
    Fit { data: PathBuf },
    /// Broken power law through an intensity,yield CSV.
    Crossover { data: PathBuf },
    /// Consolidated tables from fits, hyperparameters and R results.
    Report,
}

pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // A second call within one process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    io::ensure_dir(&cli.out)?;
    match &cli.command {
        Command::Simulate => commands::simulate::run(cli),
        Command::AnalyzeG2 { tagfiles } => commands::analyze::run_g2(cli, tagfiles),
        Command::AnalyzeG3 { tagfiles } => commands::analyze::run_g3(cli, tagfiles),
        Command::Csi { tagfiles } => commands::analyze::run_csi(cli, tagfiles),
        Command::Fit { data } => commands::fit::run_fit(cli, data),
        Command::Crossover { data } => commands::fit::run_crossover(cli, data),
        Command::Report => commands::report::run(cli),
    }
}

/// Parses `args` and runs the command, mapping failures to exit codes:
/// 1 output i/o, 2 configuration or usage, 3 input data, 4 convergence.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hhgq: {e}");
            e.into()
        }
    }
}

//! Command-line front end for two-stage adaptive many-to-one designs.
//!
//! Exit status: 0 success, 1 runtime failure, 2 configuration or input error.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{RunOptions, RunReport};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "adaptrial", version, about = "Two-stage adaptive treatment-selection designs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration (or a `.meta.json` sidecar from an earlier run).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Overrides the config's seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Overrides the config's replication count.
    #[arg(long, global = true, value_name = "COUNT")]
    pub replications: Option<u64>,

    /// Directory receiving the artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    /// Worker threads; changes speed only, never results.
    #[arg(long, global = true, value_name = "COUNT", env = "ADAPTRIAL_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Power sweep over effect sizes and designs.
    Power,
    /// Power and selection probabilities across stage-1 ratios.
    SelectionProbs,
    /// Nested single- or two-stage analysis of a dataset.
    Analyze,
    /// Type I error of a combination-test boundary set.
    Validate,
}

/// Runs a parsed command line inside a pool of the requested size.
pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let g = &cli.global;
    let config = g
        .config
        .clone()
        .ok_or_else(|| CliError::Invalid("--config <PATH> is required".into()))?;
    if g.threads == Some(0) {
        return Err(CliError::Invalid("--threads must be >= 1".into()));
    }
    if g.replications == Some(0) {
        return Err(CliError::Invalid("--replications must be >= 1".into()));
    }
    let opts = RunOptions { config, seed: g.seed, replications: g.replications, out: g.out.clone() };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = g.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Power => commands::power(&opts),
        Command::SelectionProbs => commands::selection_probs(&opts),
        Command::Analyze => commands::analyze(&opts),
        Command::Validate => commands::validate(&opts),
    })
}

/// Parses `args` (program name first), runs, reports, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            println!("{}", report.summary.trim_end());
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

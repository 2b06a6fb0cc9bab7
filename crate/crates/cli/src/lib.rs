//! Command-line front end: `run`, `validate`, `replay` and `report`.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "taskbot", version, about = "Household-robot task planning harness for tool-calling language models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment matrix, write transcripts and print the report.
    Run(RunArgs),
    /// Run the built-in self-checks.
    Validate(ValidateArgs),
    /// Re-run a recorded transcript and check that it reproduces exactly.
    Replay(ReplayArgs),
    /// Re-render a report from one or more result indexes.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment file (TOML). Without it, all tasks and presets run once.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `oracle`, or the model name of one configured backend.
    #[arg(long)]
    pub backend: Option<String>,
    /// Comma-separated task kinds, or `all`.
    #[arg(long)]
    pub tasks: Option<String>,
    /// Comma-separated preset labels or slugs, or `all`.
    #[arg(long)]
    pub techniques: Option<String>,
    #[arg(long)]
    pub repetitions: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long, default_value = "markdown")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Seeds per (task, preset) cell in the oracle suite.
    #[arg(long, default_value_t = 50)]
    pub seeds: u32,
    /// Random call sequences in the world fuzz.
    #[arg(long, default_value_t = 10_000)]
    pub fuzz: usize,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub transcript: PathBuf,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `results.json` files or the experiment directories holding them.
    #[arg(required = true)]
    pub indexes: Vec<PathBuf>,
    #[arg(long, default_value = "markdown")]
    pub format: String,
}

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    /// A validation check failed or a replay diverged.
    CheckFailed = 1,
    /// Bad configuration, unreadable input, or a missing API key.
    Usage = 2,
    /// Every episode failed on infrastructure.
    Infrastructure = 3,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Status {
    let result = match cli.command {
        Command::Run(args) => commands::run(args, out),
        Command::Validate(args) => commands::validate(args, out),
        Command::Replay(args) => commands::replay(args, out),
        Command::Report(args) => commands::report(args, out),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            Status::Usage
        }
    }
}

//! Experiment driver for the `irlv` library.
//!
//! Each subcommand reads a [`RunConfig`], runs one experiment and writes CSV
//! files plus a `manifest.toml` listing every output with its SHA-256 hash.
//! Outputs depend only on the configuration and the seed offset.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod manifest;

pub use config::RunConfig;
pub use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] irlv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for bad configuration, 3 for numeric failures,
    /// 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(irlv::Error::Io(_) | irlv::Error::Csv(_)) | CliError::Io(_) => 1,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "irlv", version, about = "In-region location verification experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ROC curves of the neural verifier on the street map, swept over
    /// hidden-layer widths and training-set sizes.
    Roc(CommonArgs),
    /// Neural verifier against the Neyman-Pearson test on the circular map.
    NpCompare(CommonArgs),
    /// Base-station placement by particle swarm optimization.
    Plan(CommonArgs),
    /// Shadowing field realizations and their covariance diagnostic.
    Field(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir` of the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Added to every seed of the configuration.
    #[arg(long, default_value_t = 0)]
    pub seed_offset: u64,
    /// Number of worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Roc(_) => "roc",
            Command::NpCompare(_) => "np-compare",
            Command::Plan(_) => "plan",
            Command::Field(_) => "field",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Roc(a) | Command::NpCompare(a) | Command::Plan(a) | Command::Field(a) => a,
        }
    }
}

/// Runs a parsed command line and returns the written manifest.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    let args = cli.command.args();
    let cfg = RunConfig::load(&args.config)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    let ctx = commands::Context::new(cfg, args.seed_offset);
    let artifacts = pool.install(|| match cli.command {
        Command::Roc(_) => commands::cmd_roc(&ctx),
        Command::NpCompare(_) => commands::cmd_np_compare(&ctx),
        Command::Plan(_) => commands::cmd_plan(&ctx),
        Command::Field(_) => commands::cmd_field(&ctx),
    })?;
    manifest::write_outputs(&out, cli.command.name(), &ctx, &artifacts)
}

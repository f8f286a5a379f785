//! `setpersist`: simulate random-set models, analyse rasters, and run the
//! outlier-detection and goodness-of-fit studies.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Overrides, PipelineConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config or unwritable output (exit 2).
    #[error("{0}")]
    Usage(String),
    /// Analysis failed on the given data (exit 1).
    #[error("{0}")]
    Analysis(String),
}

#[derive(Parser)]
#[command(name = "setpersist", version, about = "Topological summaries and tests for random-set realisations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Model name(s), comma separated: boolean, boolean-ellipse, cluster,
    /// repulsive, matern-cluster, cell, hardcore.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Intruder (outlier study) or alternative (goodness of fit) model(s).
    #[arg(long = "alt", global = true)]
    alternative: Option<String>,
    /// Realisations (simulate), sample size (outlier study) or simulations
    /// per test (goodness of fit, envelope plot).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Study repetitions.
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Summaries, comma separated: APF0, APF1, HZ0, HZ1, CF, ESF.
    #[arg(long, global = true)]
    summary: Option<String>,
    /// Raster columns (at least 64).
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Envelope ranking: erl (default) or extreme.
    #[arg(long, global = true)]
    ordering: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write grain JSON and PGM rasters for simulated realisations.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Persistence diagrams and summary curves of rasters or grain files.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Also write an SVG plot per curve.
        #[arg(long)]
        svg: bool,
        /// PGM/CSV rasters or grain-configuration JSON files.
        inputs: Vec<PathBuf>,
    },
    /// Intruder detection rates by functional depth.
    OutlierStudy {
        #[command(flatten)]
        common: Common,
    },
    /// Rejection rates of global envelope tests.
    GofStudy {
        #[command(flatten)]
        common: Common,
    },
    /// One envelope test with its CSV, JSON and SVG outputs.
    EnvelopePlot {
        #[command(flatten)]
        common: Common,
        /// Observed raster or grain file; defaults to a draw from --alt.
        #[arg(long)]
        observed: Option<PathBuf>,
    },
}

fn resolve(common: &Common) -> Result<PipelineConfig, CliError> {
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let flags = Overrides {
        model: common.model.clone(),
        alternative: common.alternative.clone(),
        resolution: common.resolution,
        summary: common.summary.clone(),
        seed: common.seed,
        out: common.out.clone(),
        n: common.n,
        reps: common.reps,
        alpha: common.alpha,
        ordering: common.ordering.clone(),
    };
    PipelineConfig::resolve(file, flags)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SETPERSIST_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("SETPERSIST_THREADS={value} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Returns whether the analysis failed outright.
fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { common } => commands::simulate(&resolve(&common)?).map(|_| false),
        Command::Analyze { common, svg, inputs } => commands::analyze(&resolve(&common)?, &inputs, svg),
        Command::OutlierStudy { common } => commands::outlier_study(&resolve(&common)?),
        Command::GofStudy { common } => commands::gof_study(&resolve(&common)?),
        Command::EnvelopePlot { common, observed } => {
            commands::envelope_plot(&resolve(&common)?, observed.as_deref()).map(|_| false)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: no successful analyses");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

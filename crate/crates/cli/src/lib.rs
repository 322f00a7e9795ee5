//! Command-line driver: loads a run configuration, ingests resources and
//! writes statistics, pair similarities, score matrices, evaluation reports
//! and exporter requests.

pub mod commands;
pub mod config;
pub mod heatmap;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration or unusable input resource.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Resource(interlex::Error),
    #[error("{0}")]
    Compute(interlex::Error),
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration and resource problems, 1 for failures during
    /// computation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Resource(_) => 2,
            CliError::Compute(_) | CliError::Output { .. } => 1,
        }
    }

    pub(crate) fn output(path: &Path, source: std::io::Error) -> CliError {
        CliError::Output {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<interlex::Error> for CliError {
    fn from(e: interlex::Error) -> Self {
        use interlex::Error as E;
        match e {
            E::Io { .. }
            | E::Parse { .. }
            | E::InvalidLanguage(_)
            | E::EmptyLexicon
            | E::LineCountMismatch(..)
            | E::MissingResource(_)
            | E::InsufficientPermutations(_)
            | E::TooFewObservations(_) => CliError::Resource(e),
            _ => CliError::Compute(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "interlex",
    version,
    about = "Directional lexical intelligibility between related languages"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration file (TOML).
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Comma-separated language codes, replacing the configured list.
    #[arg(long, global = true, value_delimiter = ',')]
    pub languages: Option<Vec<String>>,
    /// Comma-separated channel configurations, e.g. orthographic-static.
    #[arg(long, global = true, value_delimiter = ',')]
    pub channels: Option<Vec<String>>,
    #[arg(short, long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses one per CPU.
    #[arg(short, long, global = true)]
    pub workers: Option<usize>,
    /// Sentence pairs per processing batch.
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            languages: self.languages.clone(),
            output_dir: self.output_dir.clone(),
            seed: self.seed,
            workers: self.workers,
            batch_size: self.batch_size,
            permutations: None,
            channels: self.channels.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus statistics per language pair.
    Stats,
    /// Per-pair surface and semantic similarities and indices.
    Pairsim,
    /// Directional score matrices and heatmaps.
    Matrix,
    /// Rank correlation of one score matrix with cloze-test results.
    Eval {
        /// CSV with columns speaker,listener,score.
        #[arg(long)]
        cloze: PathBuf,
        /// Channel configuration to evaluate (default: the first selected).
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        permutations: Option<usize>,
    },
    /// Lexicon words without a phonetic transcription.
    NeedsTranscription,
    /// Sampled corpus occurrences for the contextual-vector exporter.
    ExportRequests,
}

/// Parses the configuration and runs one command.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut overrides = cli.global.overrides();
    if let Command::Eval { permutations, .. } = &cli.command {
        overrides.permutations = *permutations;
    }
    let config = RunConfig::load(cli.global.config.as_deref(), &overrides)?;
    match &cli.command {
        Command::Stats => commands::stats(&config).map(drop),
        Command::Pairsim => commands::pairsim(&config).map(drop),
        Command::Matrix => commands::matrix(&config).map(drop),
        Command::Eval { cloze, channel, .. } => {
            commands::eval(&config, cloze, channel.as_deref()).map(drop)
        }
        Command::NeedsTranscription => commands::needs_transcription(&config).map(drop),
        Command::ExportRequests => commands::export_requests(&config).map(drop),
    }
}

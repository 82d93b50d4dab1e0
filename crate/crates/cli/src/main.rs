//! `topic-privacy`: membership inference experiments against topic models
//! and the differentially private defense.

mod commands;
mod config;
mod data;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "topic-privacy", version, about)]
struct Cli {
    /// Experiment configuration (TOML). Defaults describe the synthetic fixture.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the config. Replication r uses seed + r.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory that receives every output file.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    force: bool,

    /// Worker threads for shadow training (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tokenize raw text (one document per line) into corpus files.
    Preprocess {
        #[arg(long)]
        input: Option<PathBuf>,
        /// One author label per line of the input.
        #[arg(long)]
        authors: Option<PathBuf>,
    },
    /// Document count, mean length and vocabulary size of the dataset.
    Profile,
    /// Write the synthetic planted-topic corpus and its true model.
    Synthesize,
    /// Train non-private LDA on the dataset.
    Train,
    /// Run the membership inference attacks over replications.
    Attack,
    /// Train private models and attack them.
    Defend,
    /// ROC curve and AUC of a score file.
    EvalRoc {
        #[arg(long)]
        scores: PathBuf,
    },
    /// Topic coherence of a saved model against the dataset.
    EvalCoherence {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vocabulary: PathBuf,
    },
    /// KL separation and Shapiro-Wilk normality of each statistic.
    DiagnoseStatistics,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Preprocess { .. } => "preprocess",
            Command::Profile => "profile",
            Command::Synthesize => "synthesize",
            Command::Train => "train",
            Command::Attack => "attack",
            Command::Defend => "defend",
            Command::EvalRoc { .. } => "eval-roc",
            Command::EvalCoherence { .. } => "eval-coherence",
            Command::DiagnoseStatistics => "diagnose-statistics",
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let cfg = LoadedConfig::load(cli.config.as_deref(), cli.seed)?;
    let out = OutputDir::new(cli.out_dir, cli.force, cli.command.name(), cfg.config.seed, &cfg.hash);
    let ctx = Context { cfg, out };
    match cli.command {
        Command::Preprocess { input, authors } => commands::preprocess(&ctx, input, authors),
        Command::Profile => commands::profile(&ctx),
        Command::Synthesize => commands::synthesize(&ctx),
        Command::Train => commands::train(&ctx),
        Command::Attack => commands::attack(&ctx),
        Command::Defend => commands::defend(&ctx),
        Command::EvalRoc { scores } => commands::eval_roc(&ctx, &scores),
        Command::EvalCoherence { model, vocabulary } => commands::eval_coherence(&ctx, &model, &vocabulary),
        Command::DiagnoseStatistics => commands::diagnose_statistics(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("topic-privacy: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

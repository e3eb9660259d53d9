use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use kline_cli::config::{ExperimentConfig, Overrides};
use kline_cli::{build_cmd, evaluate, fetch, matrix, train_cmd, AppResult};

/// Candlestick-chart trend-prediction pipeline.
#[derive(Parser)]
#[command(name = "kline", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Restrict to one forecast horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Restrict to one chart variant.
    #[arg(long)]
    variant: Option<String>,
    /// Use one split strategy (random, automatic, time).
    #[arg(long)]
    split: Option<String>,
    /// Override both the split seed and the training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Download per-ticker CSVs from the configured endpoint.
    Fetch {
        #[command(flatten)]
        common: Common,
        /// Re-download files that already exist.
        #[arg(long)]
        force: bool,
    },
    /// Build labeled image datasets from the CSVs.
    Build {
        #[command(flatten)]
        common: Common,
    },
    /// Train one (variant, horizon) cell and write a checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a checkpoint on the test partition.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Checkpoint path (default: the cell's trained checkpoint).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run the full split × variant × horizon grid and emit reports.
    Matrix {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> AppResult<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&common.config)?;
    let overrides = Overrides {
        horizon: common.horizon,
        variant: common.variant.clone(),
        split: common.split.clone(),
        seed: common.seed,
        out: common.out.clone(),
    };
    overrides.apply(&mut config)?;
    Ok(config)
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Fetch { common, force } => {
            let config = load_config(&common)?;
            let summary = fetch::cmd_fetch(&config, force)?;
            eprintln!("fetch: {} downloaded, {} skipped", summary.downloaded, summary.skipped);
        }
        Command::Build { common } => {
            let config = load_config(&common)?;
            let summary = build_cmd::cmd_build(&config)?;
            for (variant, horizon, count) in &summary.datasets {
                eprintln!("build: {}/h{horizon}: {count} samples", variant.name());
            }
        }
        Command::Train { common } => {
            let config = load_config(&common)?;
            let outcome = train_cmd::cmd_train(&config)?;
            eprintln!(
                "train: wrote {} and {}",
                outcome.checkpoint_path.display(),
                outcome.history_path.display()
            );
        }
        Command::Evaluate { common, checkpoint } => {
            let config = load_config(&common)?;
            evaluate::cmd_evaluate(&config, checkpoint.as_deref())?;
        }
        Command::Matrix { common } => {
            let config = load_config(&common)?;
            let outcome = matrix::cmd_matrix(&config)?;
            if !outcome.failures.is_empty() {
                eprintln!("matrix: {} cell(s) failed, see the results table", outcome.failures.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

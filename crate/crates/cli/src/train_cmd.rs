//! `train`: fit the CNN on the train partition and persist the result.

use std::fmt::Write as _;
use std::path::PathBuf;

use kline_core::dataset::{
    split_automatic, split_random, split_time, DatasetError, Sample, SplitResult, SplitStrategy,
};
use kline_core::imaging::ChartVariant;
use kline_core::nn::{train, EpochStats, ModelSpec, NnError};

use crate::checkpoint;
use crate::config::ExperimentConfig;
use crate::fsutil::atomic_write;
use crate::store::{dataset_dir, load_dataset, DatasetMeta};
use crate::{AppError, AppResult};

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const HISTORY_FILE: &str = "history.tsv";

/// Directory for one trained cell's artifacts.
pub fn model_dir(
    config: &ExperimentConfig,
    strategy: SplitStrategy,
    variant: ChartVariant,
    horizon: usize,
) -> PathBuf {
    config
        .out_dir
        .join("models")
        .join(strategy.name())
        .join(variant.name())
        .join(format!("h{horizon}"))
}

/// `train`/`evaluate` work on exactly one grid cell; the config (after
/// overrides) must pin a single variant and horizon.
pub fn single_cell(config: &ExperimentConfig) -> AppResult<(ChartVariant, usize)> {
    match (&config.variants[..], &config.horizons[..]) {
        (&[variant], &[horizon]) => Ok((variant, horizon)),
        _ => Err(AppError::usage(
            "this command needs exactly one variant and horizon; narrow the config or pass --variant/--horizon",
        )),
    }
}

/// Applies the configured strategy's parameters to partition `samples`.
pub fn split_samples(
    config: &ExperimentConfig,
    strategy: SplitStrategy,
    samples: Vec<Sample>,
) -> AppResult<SplitResult> {
    let result = match strategy {
        SplitStrategy::Random => split_random(samples, config.test_ratio, config.split_seed),
        SplitStrategy::Automatic => split_automatic(samples, config.train_ratio),
        SplitStrategy::Time => split_time(samples, config.cutoff()),
    };
    result.map_err(|e: DatasetError| AppError::data(e.to_string()))
}

pub fn spec_for(meta: &DatasetMeta) -> ModelSpec {
    ModelSpec::with_input(meta.height, meta.width)
}

pub struct TrainedCell {
    pub checkpoint_path: PathBuf,
    pub history_path: PathBuf,
    pub history: Vec<EpochStats>,
    pub n_train: usize,
    pub n_test: usize,
}

/// Trains one (strategy, variant, horizon) cell from its on-disk dataset and
/// writes `checkpoint.bin` + `history.tsv`.
pub fn train_cell(
    config: &ExperimentConfig,
    strategy: SplitStrategy,
    variant: ChartVariant,
    horizon: usize,
) -> AppResult<TrainedCell> {
    let (meta, samples) = load_dataset(&dataset_dir(&config.out_dir, variant, horizon))?;
    let split = split_samples(config, strategy, samples)?;
    if split.test.is_empty() {
        eprintln!(
            "train: warning: empty test partition under the {} split; training proceeds",
            strategy.name()
        );
    }
    if split.train.is_empty() {
        return Err(AppError::data(format!(
            "empty train partition under the {} split",
            strategy.name()
        )));
    }
    let n_train = split.train.len();
    let n_test = split.test.len();

    let spec = spec_for(&meta);
    let mut inputs = Vec::with_capacity(n_train);
    let mut labels = Vec::with_capacity(n_train);
    for sample in split.train {
        inputs.push(sample.tensor);
        labels.push(sample.label);
    }

    let (params, history) = train(&spec, &inputs, &labels, &config.train).map_err(|e| match e {
        NnError::NonFiniteLoss { .. } => AppError::Divergence(e.to_string()),
        NnError::EmptyDataset => AppError::Data(e.to_string()),
        other => AppError::Usage(other.to_string()),
    })?;

    let dir = model_dir(config, strategy, variant, horizon);
    let checkpoint_path = dir.join(CHECKPOINT_FILE);
    checkpoint::save(&checkpoint_path, &spec, &params)?;
    let history_path = dir.join(HISTORY_FILE);
    atomic_write(&history_path, render_history(&history).as_bytes())?;

    for e in &history {
        eprintln!(
            "train: {}/{}/h{horizon}: epoch {} loss {:.6} accuracy {:.4}",
            strategy.name(),
            variant.name(),
            e.epoch,
            e.loss,
            e.train_accuracy
        );
    }
    Ok(TrainedCell { checkpoint_path, history_path, history, n_train, n_test })
}

pub fn render_history(history: &[EpochStats]) -> String {
    let mut out = String::from("epoch\tloss\ttrain_accuracy\n");
    for e in history {
        let _ = writeln!(out, "{}\t{:.9}\t{:.6}", e.epoch, e.loss, e.train_accuracy);
    }
    out
}

pub fn cmd_train(config: &ExperimentConfig) -> AppResult<TrainedCell> {
    let (variant, horizon) = single_cell(config)?;
    train_cell(config, config.split, variant, horizon)
}

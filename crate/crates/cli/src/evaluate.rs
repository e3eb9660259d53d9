//! `evaluate`: score a checkpoint on the test partition.

use std::path::{Path, PathBuf};

use kline_core::dataset::SplitStrategy;
use kline_core::imaging::ChartVariant;
use kline_core::metrics::confusion;
use kline_core::nn::predict;

use crate::checkpoint;
use crate::config::ExperimentConfig;
use crate::fsutil::atomic_write;
use crate::report::{render_table, Provenance, ReportCell};
use crate::store::{dataset_dir, load_dataset};
use crate::train_cmd::{model_dir, single_cell, spec_for, split_samples, CHECKPOINT_FILE};
use crate::{AppError, AppResult};

pub fn provenance(config: &ExperimentConfig) -> Provenance {
    Provenance {
        config_hash: config.config_hash(),
        split_seed: config.split_seed,
        train_seed: config.train.seed,
    }
}

/// Evaluates one (strategy, variant, horizon) cell in eval mode and writes
/// its single-row report.
pub fn evaluate_cell(
    config: &ExperimentConfig,
    strategy: SplitStrategy,
    variant: ChartVariant,
    horizon: usize,
    checkpoint_path: Option<&Path>,
) -> AppResult<ReportCell> {
    let (meta, samples) = load_dataset(&dataset_dir(&config.out_dir, variant, horizon))?;
    let split = split_samples(config, strategy, samples)?;
    if split.test.is_empty() {
        return Err(AppError::data(format!(
            "empty test set under the {} split; nothing to evaluate",
            strategy.name()
        )));
    }
    let n_train = split.train.len();
    let n_test = split.test.len();

    let spec = spec_for(&meta);
    let default_path = model_dir(config, strategy, variant, horizon).join(CHECKPOINT_FILE);
    let params = checkpoint::load(checkpoint_path.unwrap_or(&default_path), &spec)?;

    let mut predictions = Vec::with_capacity(n_test);
    let mut labels = Vec::with_capacity(n_test);
    for sample in &split.test {
        let (class, _probs) = predict(&spec, &params, &sample.tensor)
            .map_err(|e| AppError::data(e.to_string()))?;
        predictions.push(class);
        labels.push(sample.label);
    }
    let c = confusion(&predictions, &labels).map_err(|e| AppError::data(e.to_string()))?;

    let cell = ReportCell { strategy, variant, horizon, confusion: c, n_train, n_test };
    let report_path = cell_report_path(config, strategy, variant, horizon);
    atomic_write(&report_path, render_table(&[cell], &[], &provenance(config)).as_bytes())?;
    println!("{}", cell.human_line());
    Ok(cell)
}

pub fn cell_report_path(
    config: &ExperimentConfig,
    strategy: SplitStrategy,
    variant: ChartVariant,
    horizon: usize,
) -> PathBuf {
    config
        .out_dir
        .join("reports")
        .join(format!("cell_{}_{}_h{horizon}.tsv", strategy.name(), variant.name()))
}

pub fn cmd_evaluate(
    config: &ExperimentConfig,
    checkpoint_path: Option<&Path>,
) -> AppResult<ReportCell> {
    let (variant, horizon) = single_cell(config)?;
    evaluate_cell(config, config.split, variant, horizon, checkpoint_path)
}

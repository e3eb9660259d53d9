//! `matrix`: sweep the split × variant × horizon grid and emit the results
//! table plus figures.

use std::path::PathBuf;

use crate::build_cmd::{build_dataset, load_series, BuildSummary};
use crate::config::ExperimentConfig;
use crate::evaluate::{evaluate_cell, provenance};
use crate::fsutil::atomic_write;
use crate::report::{parse_table, render_table, ReportCell};
use crate::store::{dataset_dir, MANIFEST_FILE};
use crate::svg::{split_bar_chart, variant_chart};
use crate::train_cmd::train_cell;
use crate::{AppError, AppResult};

pub struct MatrixOutcome {
    pub results_path: PathBuf,
    pub figure_paths: Vec<PathBuf>,
    pub cells: Vec<ReportCell>,
    /// (cell name, reason) for grid cells that failed; the rest completed.
    pub failures: Vec<(String, String)>,
}

pub fn cmd_matrix(config: &ExperimentConfig) -> AppResult<MatrixOutcome> {
    // Phase 1: make sure every (variant, horizon) dataset exists.
    let mut series_list = None;
    let mut build_summary = BuildSummary::default();
    for &variant in &config.variants {
        for &horizon in &config.horizons {
            let dir = dataset_dir(&config.out_dir, variant, horizon);
            if dir.join(MANIFEST_FILE).exists() {
                continue;
            }
            if series_list.is_none() {
                series_list = Some(load_series(config)?);
            }
            build_dataset(
                config,
                series_list.as_ref().unwrap(),
                variant,
                horizon,
                &mut build_summary,
            )?;
        }
    }

    // Phase 2: train and evaluate each grid cell; record failures, keep going.
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for &strategy in &config.splits {
        for &variant in &config.variants {
            for &horizon in &config.horizons {
                let name = format!("{}/{}/h{horizon}", strategy.name(), variant.name());
                let outcome = train_cell(config, strategy, variant, horizon).and_then(|_| {
                    evaluate_cell(config, strategy, variant, horizon, None)
                });
                match outcome {
                    Ok(cell) => cells.push(cell),
                    Err(AppError::Usage(m)) => return Err(AppError::Usage(m)),
                    Err(e) => {
                        eprintln!("matrix: {name}: FAILED: {e}");
                        failures.push((name, e.to_string()));
                    }
                }
            }
        }
    }

    // Phase 3: the results table, then figures as a pure function of it.
    let reports = config.out_dir.join("reports");
    let results_path = reports.join("results.tsv");
    let table = render_table(&cells, &failures, &provenance(config));
    atomic_write(&results_path, table.as_bytes())?;

    let parsed = parse_table(&table)?;
    let mut figure_paths = Vec::new();
    for &variant in &config.variants {
        if !parsed.iter().any(|c| c.variant == variant) {
            continue;
        }
        let path = reports.join(format!("fig_{}.svg", variant.name()));
        atomic_write(&path, variant_chart(variant, &parsed).as_bytes())?;
        figure_paths.push(path);
    }
    if config.splits.len() >= 2 {
        let horizon = bar_chart_horizon(config, &parsed);
        let path = reports.join("fig_splits.svg");
        atomic_write(&path, split_bar_chart(&parsed, horizon).as_bytes())?;
        figure_paths.push(path);
    }

    println!("matrix: {} cells ok, {} failed -> {}", cells.len(), failures.len(), results_path.display());
    Ok(MatrixOutcome { results_path, figure_paths, cells, failures })
}

/// The configured comparison horizon when present in the table, otherwise
/// the largest horizon that actually has results.
fn bar_chart_horizon(config: &ExperimentConfig, cells: &[ReportCell]) -> usize {
    if cells.iter().any(|c| c.horizon == config.figure_horizon) {
        return config.figure_horizon;
    }
    cells.iter().map(|c| c.horizon).max().unwrap_or(config.figure_horizon)
}

/// Re-emits figures from an existing results table; used to verify that
/// figures are derived from the table alone.
pub fn figures_from_table(
    config: &ExperimentConfig,
    table_text: &str,
) -> AppResult<Vec<(PathBuf, String)>> {
    let parsed = parse_table(table_text)?;
    let reports = config.out_dir.join("reports");
    let mut out = Vec::new();
    for &variant in &config.variants {
        if parsed.iter().any(|c| c.variant == variant) {
            out.push((
                reports.join(format!("fig_{}.svg", variant.name())),
                variant_chart(variant, &parsed),
            ));
        }
    }
    if config.splits.len() >= 2 {
        let horizon = bar_chart_horizon(config, &parsed);
        out.push((reports.join("fig_splits.svg"), split_bar_chart(&parsed, horizon)));
    }
    Ok(out)
}

//! `build`: turn per-ticker CSVs into on-disk image datasets.

use std::path::Path;

use kline_core::dataset::{build_samples, DatasetError, Sample};
use kline_core::imaging::{tensor_to_image, ChartVariant, WINDOW_LEN};
use kline_core::market_data::{parse_csv, validate, Series};

use crate::config::ExperimentConfig;
use crate::fetch::csv_path;
use crate::pngio::write_png;
use crate::store::{dataset_dir, write_dataset};
use crate::{AppError, AppResult};

#[derive(Debug, Default)]
pub struct BuildSummary {
    /// (variant, horizon, sample count) per dataset written.
    pub datasets: Vec<(ChartVariant, usize, usize)>,
    /// (dataset/ticker, reason) for tickers skipped within a dataset.
    pub skipped: Vec<(String, String)>,
}

/// Reads and validates every configured ticker, in config order.
pub fn load_series(config: &ExperimentConfig) -> AppResult<Vec<Series>> {
    if config.tickers.is_empty() {
        return Err(AppError::usage("build requires a non-empty `tickers` list"));
    }
    let mut out = Vec::with_capacity(config.tickers.len());
    for ticker in &config.tickers {
        let path = csv_path(&config.data_dir, ticker);
        let raw = std::fs::read(&path)
            .map_err(|e| AppError::data(format!("cannot read {}: {e}", path.display())))?;
        let series = parse_csv(ticker, &raw)
            .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
        let violations = validate(&series);
        if !violations.is_empty() {
            eprintln!(
                "build: {ticker}: {} bar-invariant violation(s), e.g. bar {} breaks {}",
                violations.len(),
                violations[0].bar_index,
                violations[0].rule
            );
        }
        out.push(series);
    }
    Ok(out)
}

/// Builds and writes one (variant, horizon) dataset from already-loaded
/// series. Per-ticker `SeriesTooShort` is reported and skipped; any other
/// build error aborts.
pub fn build_dataset(
    config: &ExperimentConfig,
    series_list: &[Series],
    variant: ChartVariant,
    horizon: usize,
    summary: &mut BuildSummary,
) -> AppResult<usize> {
    let style = config.style_for(variant);
    let mut samples: Vec<Sample> = Vec::new();
    for series in series_list {
        match build_samples(series, WINDOW_LEN, horizon, &style) {
            Ok(mut s) => {
                eprintln!(
                    "build: {}/h{horizon}: {}: {} samples",
                    variant.name(),
                    series.ticker,
                    s.len()
                );
                samples.append(&mut s);
            }
            Err(e @ DatasetError::SeriesTooShort { .. }) => {
                eprintln!(
                    "build: {}/h{horizon}: {}: skipped ({e})",
                    variant.name(),
                    series.ticker
                );
                summary
                    .skipped
                    .push((format!("{}/h{horizon}/{}", variant.name(), series.ticker), e.to_string()));
            }
            Err(e) => return Err(AppError::data(e.to_string())),
        }
    }

    let dir = dataset_dir(&config.out_dir, variant, horizon);
    write_dataset(&dir, &samples, variant, horizon, config.image_width, config.image_height)?;
    if config.write_png {
        dump_pngs(&config.out_dir, variant, horizon, &samples)?;
    }
    summary.datasets.push((variant, horizon, samples.len()));
    Ok(samples.len())
}

fn dump_pngs(
    out_dir: &Path,
    variant: ChartVariant,
    horizon: usize,
    samples: &[Sample],
) -> AppResult<()> {
    let dir = out_dir.join("png").join(variant.name()).join(format!("h{horizon}"));
    for sample in samples {
        let name = format!("{}_{}_{}.png", sample.ticker, sample.end_date, sample.label);
        write_png(&dir.join(name), &tensor_to_image(&sample.tensor))?;
    }
    Ok(())
}

/// Builds every (variant, horizon) dataset in the config grid.
pub fn cmd_build(config: &ExperimentConfig) -> AppResult<BuildSummary> {
    let series_list = load_series(config)?;
    let mut summary = BuildSummary::default();
    for &variant in &config.variants {
        for &horizon in &config.horizons {
            build_dataset(config, &series_list, variant, horizon, &mut summary)?;
        }
    }
    Ok(summary)
}

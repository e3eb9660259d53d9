//! OHLCV download against a CSV endpoint.
//!
//! The endpoint contract is a plain HTTP GET
//! `<endpoint>?symbol=<ticker>&start=<YYYY-MM-DD>&end=<YYYY-MM-DD>` whose
//! response body is the same CSV layout `parse_csv` accepts. Responses are
//! parsed, filtered to the requested date range, and re-serialized, so a
//! fetched file always re-parses to the identical series.

use std::path::{Path, PathBuf};

use kline_core::market_data::{parse_csv, serialize_csv, ParseError, Series};
use kline_core::Date;

use crate::config::ExperimentConfig;
use crate::fsutil::atomic_write;
use crate::{AppError, AppResult};

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("network error: {0}")]
    Network(String),
    #[error("HTTP status {0}")]
    HttpStatus(u16),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Downloads one ticker's series and filters it to `[start, end]`.
pub fn fetch_remote(
    endpoint: &str,
    ticker: &str,
    start: Date,
    end: Date,
) -> Result<Series, FetchError> {
    let url = format!("{endpoint}?symbol={ticker}&start={start}&end={end}");
    let mut response = ureq::get(&url).call().map_err(|e| match e {
        ureq::Error::StatusCode(code) => FetchError::HttpStatus(code),
        other => FetchError::Network(other.to_string()),
    })?;
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| FetchError::Network(e.to_string()))?;
    let mut series = parse_csv(ticker, body.as_bytes())?;
    series.bars.retain(|bar| bar.date >= start && bar.date <= end);
    if series.bars.is_empty() {
        return Err(FetchError::Parse(ParseError::EmptyInput));
    }
    Ok(series)
}

pub fn csv_path(data_dir: &Path, ticker: &str) -> PathBuf {
    data_dir.join(format!("{ticker}.csv"))
}

/// Downloads every configured ticker into `data_dir`, skipping files that
/// already exist unless `force` is set. A failing ticker is reported and the
/// batch continues; any failure makes the whole command fail with a data
/// error after the rest have been written.
pub fn cmd_fetch(config: &ExperimentConfig, force: bool) -> AppResult<FetchSummary> {
    let endpoint = config
        .endpoint
        .as_deref()
        .ok_or_else(|| AppError::usage("fetch requires `endpoint` in the config"))?;
    if config.tickers.is_empty() {
        return Err(AppError::usage("fetch requires a non-empty `tickers` list"));
    }
    std::fs::create_dir_all(&config.data_dir)?;

    let mut summary = FetchSummary::default();
    for ticker in &config.tickers {
        let path = csv_path(&config.data_dir, ticker);
        if path.exists() && !force {
            eprintln!("fetch: {ticker}: already present, skipping");
            summary.skipped += 1;
            continue;
        }
        match fetch_remote(endpoint, ticker, config.train_start, config.test_end) {
            Ok(series) => {
                atomic_write(&path, serialize_csv(&series).as_bytes())?;
                eprintln!("fetch: {ticker}: {} bars -> {}", series.len(), path.display());
                summary.downloaded += 1;
            }
            Err(e) => {
                eprintln!("fetch: {ticker}: FAILED: {e}");
                summary.failed.push((ticker.clone(), e.to_string()));
            }
        }
    }
    if summary.failed.is_empty() {
        Ok(summary)
    } else {
        let names: Vec<&str> = summary.failed.iter().map(|(t, _)| t.as_str()).collect();
        Err(AppError::data(format!(
            "{} of {} tickers failed to fetch: {}",
            summary.failed.len(),
            config.tickers.len(),
            names.join(", ")
        )))
    }
}

#[derive(Debug, Default)]
pub struct FetchSummary {
    pub downloaded: usize,
    pub skipped: usize,
    pub failed: Vec<(String, String)>,
}

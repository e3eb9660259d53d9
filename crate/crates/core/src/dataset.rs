//! Windowing, labeling, and train/test partitioning.
//!
//! A sample is a rendered 60-bar window ending at bar `i`, labeled by whether
//! the close `horizon_d` trading days later is above the close at `i` (ties
//! count as "no rise" → 0). Sixty bars before each window's start are
//! reserved as indicator warmup regardless of variant, so sample counts are
//! identical across richness classes.
//!
//! Three partitioning strategies are provided. Random and sequential
//! ("automatic") splits let overlapping windows straddle the boundary, so
//! test outcomes can be implied by neighboring training windows; the
//! calendar-cutoff split is the one that actually respects time. All three
//! are implemented as stated so the difference is measurable.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::date::Date;
use crate::imaging::{
    gaf, gaf_to_image, image_to_tensor, render_candles, ChartStyle, ChartVariant, RenderError,
    WindowIndicators,
};
use crate::indicators::{macd, sma, IndicatorError};
use crate::market_data::Series;
use crate::rng::{seeded, shuffle};
use crate::tensor::Tensor;

/// Bars reserved before each window's start so SMA-30 and the MACD signal
/// line are defined across all rendered positions (34 would suffice; 60
/// keeps a margin and a round number).
pub const WARMUP: usize = 60;

/// The forecast horizons studied by the experiment matrix.
pub const HORIZONS: [usize; 5] = [1, 20, 30, 60, 90];

/// One labeled window with provenance.
#[derive(Clone, PartialEq, Debug)]
pub struct Sample {
    /// Channel-first `(3, H, W)` image tensor in `[0, 1]`.
    pub tensor: Tensor<f32>,
    /// 1 if the close rose over the horizon, else 0.
    pub label: u8,
    pub ticker: String,
    /// Index of the window's last bar within its source series.
    pub end_index: usize,
    /// Date of that bar.
    pub end_date: Date,
    /// Trading days ahead used for the label.
    pub horizon_d: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("bar {index} + horizon {horizon} is outside the series (length {len})")]
    IndexOutOfRange { index: usize, horizon: usize, len: usize },
    #[error("series has {got} bars but needs {required} (warmup + window + horizon)")]
    SeriesTooShort { required: usize, got: usize },
    #[error("no samples to split")]
    EmptyInput,
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

/// Trend label for bar `i` at horizon `d`: 1 if `close[i+d] > close[i]`,
/// otherwise 0 (an unchanged close counts as "no rise").
pub fn label(series: &Series, i: usize, d: usize) -> Result<u8, DatasetError> {
    let len = series.len();
    if i >= len || i + d >= len {
        return Err(DatasetError::IndexOutOfRange { index: i, horizon: d, len });
    }
    Ok(u8::from(series.bars[i + d].close > series.bars[i].close))
}

/// Builds one sample per valid window end (stride 1).
///
/// A window end `i` is valid when `WARMUP + window_w` bars exist through `i`
/// and the label can look `horizon_d` bars ahead, so a series of length `L`
/// yields `L − WARMUP − window_w − horizon_d + 1` samples.
pub fn build_samples(
    series: &Series,
    window_w: usize,
    horizon_d: usize,
    style: &ChartStyle,
) -> Result<Vec<Sample>, DatasetError> {
    assert!(window_w >= 1, "window must be non-empty");
    let len = series.len();
    let required = WARMUP + window_w + horizon_d;
    if len < required {
        return Err(DatasetError::SeriesTooShort { required, got: len });
    }

    let closes = series.closes();
    let indicator_src = if style.variant.needs_indicators() {
        Some((sma(&closes, 5)?, sma(&closes, 10)?, sma(&closes, 30)?, macd(&closes)?))
    } else {
        None
    };

    let first_end = WARMUP + window_w - 1;
    let last_end = len - 1 - horizon_d;
    let mut samples = Vec::with_capacity(last_end - first_end + 1);
    for i in first_end..=last_end {
        let start = i + 1 - window_w;
        let image = if style.variant == ChartVariant::Gaf {
            gaf_to_image(&gaf(&closes[start..=i]), style)
        } else {
            let window_indicators = match &indicator_src {
                Some((s5, s10, s30, m)) => Some(
                    WindowIndicators::slice(s5, s10, s30, m, start, window_w)
                        .ok_or(RenderError::MissingIndicators)?,
                ),
                None => None,
            };
            render_candles(&series.bars[start..=i], window_indicators.as_ref(), style)?
        };
        samples.push(Sample {
            tensor: image_to_tensor(&image),
            label: label(series, i, horizon_d)?,
            ticker: series.ticker.clone(),
            end_index: i,
            end_date: series.bars[i].date,
            horizon_d,
        });
    }
    Ok(samples)
}

/// The three partitioning strategies.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum SplitStrategy {
    Random,
    Automatic,
    Time,
}

impl SplitStrategy {
    pub const ALL: [SplitStrategy; 3] =
        [SplitStrategy::Random, SplitStrategy::Automatic, SplitStrategy::Time];

    pub fn name(self) -> &'static str {
        match self {
            SplitStrategy::Random => "random",
            SplitStrategy::Automatic => "automatic",
            SplitStrategy::Time => "time",
        }
    }

    pub fn parse(name: &str) -> Option<SplitStrategy> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// The strategy parameter recorded alongside a split.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum SplitParam {
    /// Test fraction (random) or train fraction (automatic).
    Ratio(f64),
    /// Calendar cutoff (time).
    Cutoff(Date),
}

/// A disjoint, exhaustive train/test partition.
#[derive(Clone, PartialEq, Debug)]
pub struct SplitResult {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub strategy: SplitStrategy,
    pub parameter: SplitParam,
    /// Shuffle seed; only the random strategy uses one.
    pub seed: Option<u64>,
}

impl SplitResult {
    fn checked(self, input_len: usize) -> Self {
        assert_eq!(self.train.len() + self.test.len(), input_len, "split must be a partition");
        self
    }
}

/// Uniformly random partition with `round(test_ratio · N)` test samples.
/// Deterministic for a fixed seed.
pub fn split_random(
    samples: Vec<Sample>,
    test_ratio: f64,
    seed: u64,
) -> Result<SplitResult, DatasetError> {
    assert!(test_ratio > 0.0 && test_ratio < 1.0, "test ratio must be in (0, 1)");
    if samples.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let n = samples.len();
    let n_test = (test_ratio * n as f64).round() as usize;

    let mut indices: Vec<usize> = (0..n).collect();
    shuffle(&mut seeded(seed), &mut indices);
    let mut in_test = vec![false; n];
    for &i in &indices[..n_test] {
        in_test[i] = true;
    }

    let mut train = Vec::with_capacity(n - n_test);
    let mut test = Vec::with_capacity(n_test);
    for (sample, is_test) in samples.into_iter().zip(&in_test) {
        if *is_test {
            test.push(sample);
        } else {
            train.push(sample);
        }
    }
    Ok(SplitResult {
        train,
        test,
        strategy: SplitStrategy::Random,
        parameter: SplitParam::Ratio(test_ratio),
        seed: Some(seed),
    }
    .checked(n))
}

/// Order-preserving truncation: the first `⌊train_ratio · N⌋` samples (in the
/// given concatenation order) train, the remainder test. With multiple
/// tickers concatenated, the test side can lack entire tickers; that is the
/// strategy's documented behavior, not a bug.
pub fn split_automatic(samples: Vec<Sample>, train_ratio: f64) -> Result<SplitResult, DatasetError> {
    assert!(train_ratio > 0.0 && train_ratio <= 1.0, "train ratio must be in (0, 1]");
    if samples.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let n = samples.len();
    let n_train = (train_ratio * n as f64) as usize; // floor
    let mut train = samples;
    let test = train.split_off(n_train.min(n));
    Ok(SplitResult {
        train,
        test,
        strategy: SplitStrategy::Automatic,
        parameter: SplitParam::Ratio(train_ratio),
        seed: None,
    }
    .checked(n))
}

/// Calendar partition: windows ending before `cutoff` train, the rest test.
///
/// The window pixels never look past the end date, but the label does (it
/// compares closes `horizon_d` days ahead), so labels of late train samples
/// may peek across the cutoff. That matches the protocol being reproduced;
/// reports flag it.
pub fn split_time(samples: Vec<Sample>, cutoff: Date) -> Result<SplitResult, DatasetError> {
    if samples.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let n = samples.len();
    let (train, test): (Vec<Sample>, Vec<Sample>) =
        samples.into_iter().partition(|s| s.end_date < cutoff);
    Ok(SplitResult {
        train,
        test,
        strategy: SplitStrategy::Time,
        parameter: SplitParam::Cutoff(cutoff),
        seed: None,
    }
    .checked(n))
}

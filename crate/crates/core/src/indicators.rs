//! Moving averages and MACD over closing prices.
//!
//! Results stay index-aligned with the source series; entries inside an
//! indicator's warmup are explicitly absent rather than zero so downstream
//! rendering can skip them instead of plotting artifacts.

use alloc::vec;
use alloc::vec::Vec;

/// An indicator aligned index-for-index with its source series.
#[derive(Clone, PartialEq, Debug)]
pub struct IndicatorSeries {
    values: Vec<Option<f64>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum IndicatorError {
    #[error("period {period} exceeds series length {len}")]
    PeriodTooLong { period: usize, len: usize },
}

impl IndicatorSeries {
    fn new(values: Vec<Option<f64>>) -> Self {
        IndicatorSeries { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at `i`, or `None` during warmup.
    pub fn get(&self, i: usize) -> Option<f64> {
        self.values[i]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Index of the first defined value, if any.
    pub fn first_defined(&self) -> Option<usize> {
        self.values.iter().position(Option::is_some)
    }
}

/// Simple moving average of period `n`; defined from index `n - 1` on.
pub fn sma(closes: &[f64], n: usize) -> Result<IndicatorSeries, IndicatorError> {
    assert!(n >= 1, "period must be at least 1");
    if n > closes.len() {
        return Err(IndicatorError::PeriodTooLong { period: n, len: closes.len() });
    }
    let mut values = vec![None; closes.len()];
    let mut window_sum: f64 = closes[..n - 1].iter().sum();
    for i in n - 1..closes.len() {
        window_sum += closes[i];
        values[i] = Some(window_sum / n as f64);
        window_sum -= closes[i + 1 - n];
    }
    Ok(IndicatorSeries::new(values))
}

/// Exponential moving average of period `n` with smoothing `α = 2 / (n + 1)`,
/// seeded with the n-period SMA at index `n - 1`.
pub fn ema(closes: &[f64], n: usize) -> Result<IndicatorSeries, IndicatorError> {
    assert!(n >= 1, "period must be at least 1");
    if n > closes.len() {
        return Err(IndicatorError::PeriodTooLong { period: n, len: closes.len() });
    }
    let alpha = 2.0 / (n as f64 + 1.0);
    let mut values = vec![None; closes.len()];
    let mut level = closes[..n].iter().sum::<f64>() / n as f64;
    values[n - 1] = Some(level);
    for i in n..closes.len() {
        level = alpha * closes[i] + (1.0 - alpha) * level;
        values[i] = Some(level);
    }
    Ok(IndicatorSeries::new(values))
}

/// MACD periods `(fast, slow, signal)`; the standard convention.
pub const MACD_PERIODS: (usize, usize, usize) = (12, 26, 9);

/// MACD line, signal line, and histogram, index-aligned with the source.
#[derive(Clone, PartialEq, Debug)]
pub struct Macd {
    pub macd_line: IndicatorSeries,
    pub signal_line: IndicatorSeries,
    pub histogram: IndicatorSeries,
}

/// MACD(12, 26, 9): `macd = EMA12 − EMA26`, signal = EMA9 over the defined
/// MACD values (re-aligned to source indices), histogram = macd − signal.
///
/// Fails only when the series is too short for the slow EMA (< 26 values);
/// between 26 and 33 values the MACD line exists but the signal is entirely
/// undefined.
pub fn macd(closes: &[f64]) -> Result<Macd, IndicatorError> {
    let (fast, slow, signal_n) = MACD_PERIODS;
    let fast_ema = ema(closes, fast)?;
    let slow_ema = ema(closes, slow)?;

    let mut line = vec![None; closes.len()];
    for i in 0..closes.len() {
        if let (Some(f), Some(s)) = (fast_ema.get(i), slow_ema.get(i)) {
            line[i] = Some(f - s);
        }
    }

    // The signal EMA runs over the compacted defined MACD values, then maps
    // back to the original indices.
    let first = slow - 1;
    let defined: Vec<f64> = line[first..].iter().map(|v| v.unwrap()).collect();
    let mut signal = vec![None; closes.len()];
    if defined.len() >= signal_n {
        let sig = ema(&defined, signal_n)?;
        for (offset, v) in sig.values().iter().enumerate() {
            signal[first + offset] = *v;
        }
    }

    let histogram = line
        .iter()
        .zip(&signal)
        .map(|(l, s)| match (l, s) {
            (Some(l), Some(s)) => Some(l - s),
            _ => None,
        })
        .collect();

    Ok(Macd {
        macd_line: IndicatorSeries::new(line),
        signal_line: IndicatorSeries::new(signal),
        histogram: IndicatorSeries::new(histogram),
    })
}

//! OHLCV series parsing and validation.
//!
//! Input is the plain historical-download CSV layout
//! (`Date,Open,High,Low,Close,Adj Close,Volume`, ISO dates, `.` decimals).
//! Parsing and validation are separate passes: parsing only enforces what it
//! must to build a [`Series`] (shape, numeric fields, strictly increasing
//! dates), while [`validate`] reports price-consistency violations without
//! failing, so corrupt vendor rows can be surfaced instead of aborting a
//! batch.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::date::Date;

/// One trading day of data.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Bar {
    pub date: Date,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    /// Adjusted close as published by the vendor; parsed but unused by the
    /// chart pipeline, which works on raw prices.
    pub adj_close: Option<f64>,
    pub volume: u64,
}

/// A per-ticker sequence of bars with strictly increasing dates.
///
/// Trading-day gaps (weekends, holidays, halts) are expected; only the
/// ordering is guaranteed.
#[derive(Clone, PartialEq, Debug)]
pub struct Series {
    pub ticker: String,
    pub bars: Vec<Bar>,
}

/// Exact header row of the supported CSV layout.
pub const CSV_HEADER: &str = "Date,Open,High,Low,Close,Adj Close,Volume";

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ParseError {
    /// No data rows (or no input at all).
    #[error("empty input")]
    EmptyInput,
    /// A row (1-based physical line number) that does not fit the layout.
    #[error("malformed row at line {0}")]
    MalformedRow(usize),
    /// A row whose date is not strictly after the previous row's date.
    #[error("non-monotonic dates at line {0}")]
    NonMonotonicDates(usize),
}

/// A single bar-invariant violation found by [`validate`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    /// Index of the offending bar within the series.
    pub bar_index: usize,
    /// Name of the violated rule.
    pub rule: &'static str,
}

impl Series {
    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Closing prices in bar order.
    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }
}

/// Parses the CSV layout into a [`Series`] for `ticker`.
///
/// The header must match [`CSV_HEADER`] exactly (a wrong header is a
/// malformed line 1). Dates must be strictly increasing. Price invariants are
/// deliberately *not* checked here; run [`validate`] on the result.
pub fn parse_csv(ticker: &str, raw: &[u8]) -> Result<Series, ParseError> {
    let text = core::str::from_utf8(raw).map_err(|_| ParseError::MalformedRow(1))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or(ParseError::EmptyInput)?;
    if header.trim_end_matches('\r') != CSV_HEADER {
        return Err(ParseError::MalformedRow(1));
    }

    let mut bars = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let bar = parse_row(line).ok_or(ParseError::MalformedRow(line_no))?;
        if let Some(prev) = bars.last() {
            let prev: &Bar = prev;
            if bar.date <= prev.date {
                return Err(ParseError::NonMonotonicDates(line_no));
            }
        }
        bars.push(bar);
    }

    if bars.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    Ok(Series { ticker: ticker.to_string(), bars })
}

fn parse_row(line: &str) -> Option<Bar> {
    let mut fields = line.split(',');
    let date: Date = fields.next()?.parse().ok()?;
    let open: f64 = parse_price(fields.next()?)?;
    let high: f64 = parse_price(fields.next()?)?;
    let low: f64 = parse_price(fields.next()?)?;
    let close: f64 = parse_price(fields.next()?)?;
    let adj_field = fields.next()?;
    let adj_close = if adj_field.is_empty() { None } else { Some(parse_price(adj_field)?) };
    let volume: u64 = fields.next()?.parse().ok()?;
    if fields.next().is_some() {
        return None; // trailing fields
    }
    Some(Bar { date, open, high, low, close, adj_close, volume })
}

fn parse_price(field: &str) -> Option<f64> {
    let v: f64 = field.parse().ok()?;
    v.is_finite().then_some(v)
}

/// Serializes a series back to the CSV layout.
///
/// Float fields use the shortest representation that round-trips, so
/// `parse_csv(serialize_csv(s))` reproduces `s` exactly.
pub fn serialize_csv(series: &Series) -> String {
    use core::fmt::Write;
    let mut out = String::with_capacity(series.bars.len() * 48 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for bar in &series.bars {
        let _ = write!(out, "{},{},{},{},{},", bar.date, bar.open, bar.high, bar.low, bar.close);
        if let Some(adj) = bar.adj_close {
            let _ = write!(out, "{adj}");
        }
        let _ = write!(out, ",{}\n", bar.volume);
    }
    out
}

/// Rule names reported by [`validate`].
pub mod rules {
    pub const HIGH_GE_BODY: &str = "high≥max(open,close)";
    pub const LOW_LE_BODY: &str = "low≤min(open,close)";
    pub const HIGH_GE_LOW: &str = "high≥low";
    pub const POSITIVE_PRICES: &str = "price>0";
}

/// Reports every bar-invariant violation in the series. Never fails; an
/// empty result means the series is clean.
pub fn validate(series: &Series) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, bar) in series.bars.iter().enumerate() {
        let mut report = |rule| out.push(Violation { bar_index: i, rule });
        if bar.high < bar.open.max(bar.close) {
            report(rules::HIGH_GE_BODY);
        }
        if bar.low > bar.open.min(bar.close) {
            report(rules::LOW_LE_BODY);
        }
        if bar.high < bar.low {
            report(rules::HIGH_GE_LOW);
        }
        let prices = [bar.open, bar.high, bar.low, bar.close];
        if prices.iter().any(|p| !(*p > 0.0)) || bar.adj_close.is_some_and(|a| !(a > 0.0)) {
            report(rules::POSITIVE_PRICES);
        }
    }
    out
}

//! Result records and the tab-separated results table.
//!
//! Metrics in the table are formatted values; the confusion counts are the
//! source of truth, and parsing a table back recomputes every metric from
//! them exactly.

use std::fmt::Write as _;

use kline_core::dataset::SplitStrategy;
use kline_core::imaging::ChartVariant;
use kline_core::metrics::Confusion;

use crate::AppError;

/// One experiment cell: a (strategy, variant, horizon) evaluation.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ReportCell {
    pub strategy: SplitStrategy,
    pub variant: ChartVariant,
    pub horizon: usize,
    pub confusion: Confusion,
    pub n_train: usize,
    pub n_test: usize,
}

pub const TABLE_HEADER: &str = "strategy\tvariant\thorizon\ttp\tfp\ttn\tfn\tsensitivity\tspecificity\taccuracy\tmcc\tn_train\tn_test";

/// Warning emitted whenever a report contains random or automatic splits.
pub const LEAKAGE_WARNING: &str = "# warning: random/automatic splits scatter overlapping 60-day windows across train and test, so a test outcome can be inferred from neighboring training windows (lookahead leakage); calendar-cutoff results are the trustworthy ones";

impl ReportCell {
    pub fn table_row(&self) -> String {
        let c = &self.confusion;
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
            self.strategy.name(),
            self.variant.name(),
            self.horizon,
            c.true_positives,
            c.false_positives,
            c.true_negatives,
            c.false_negatives,
            c.sensitivity(),
            c.specificity(),
            c.accuracy(),
            c.mcc(),
            self.n_train,
            self.n_test,
        )
    }

    pub fn human_line(&self) -> String {
        let c = &self.confusion;
        format!(
            "{}/{}/h{}: accuracy {:.4}, sensitivity {:.4}, specificity {:.4}, mcc {:.4} (tp={} fp={} tn={} fn={}, train={} test={})",
            self.strategy.name(),
            self.variant.name(),
            self.horizon,
            c.accuracy(),
            c.sensitivity(),
            c.specificity(),
            c.mcc(),
            c.true_positives,
            c.false_positives,
            c.true_negatives,
            c.false_negatives,
            self.n_train,
            self.n_test,
        )
    }
}

/// Provenance stamped into every report.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub config_hash: String,
    pub split_seed: u64,
    pub train_seed: u64,
}

/// Renders the full results table: provenance comments, the leakage warning
/// when it applies, failed-cell records, the header, and one row per cell.
pub fn render_table(
    cells: &[ReportCell],
    failures: &[(String, String)],
    provenance: &Provenance,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# results");
    let _ = writeln!(
        out,
        "# config_hash={} split_seed={} train_seed={} version={}",
        provenance.config_hash,
        provenance.split_seed,
        provenance.train_seed,
        env!("CARGO_PKG_VERSION"),
    );
    if cells
        .iter()
        .any(|c| matches!(c.strategy, SplitStrategy::Random | SplitStrategy::Automatic))
    {
        let _ = writeln!(out, "{LEAKAGE_WARNING}");
    }
    for (cell, reason) in failures {
        let _ = writeln!(out, "# FAILED {cell}: {reason}");
    }
    let _ = writeln!(out, "{TABLE_HEADER}");
    for cell in cells {
        let _ = writeln!(out, "{}", cell.table_row());
    }
    out
}

/// Parses a results table back into cells (metrics recomputed from counts).
pub fn parse_table(text: &str) -> Result<Vec<ReportCell>, AppError> {
    let mut cells = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.is_empty() || line == TABLE_HEADER {
            continue;
        }
        let bad = |what: &str| AppError::data(format!("results line {}: {what}", idx + 1));
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 13 {
            return Err(bad("expected 13 tab-separated fields"));
        }
        let strategy =
            SplitStrategy::parse(fields[0]).ok_or_else(|| bad("unknown strategy"))?;
        let variant = ChartVariant::parse(fields[1]).ok_or_else(|| bad("unknown variant"))?;
        let horizon: usize = fields[2].parse().map_err(|_| bad("bad horizon"))?;
        let count = |i: usize| -> Result<u64, AppError> {
            fields[i].parse().map_err(|_| bad("bad count"))
        };
        let confusion = Confusion::new(count(3)?, count(4)?, count(5)?, count(6)?);
        let n_train: usize = fields[11].parse().map_err(|_| bad("bad n_train"))?;
        let n_test: usize = fields[12].parse().map_err(|_| bad("bad n_test"))?;
        cells.push(ReportCell { strategy, variant, horizon, confusion, n_train, n_test });
    }
    Ok(cells)
}

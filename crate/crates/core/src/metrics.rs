//! Confusion counts and the derived binary-classification statistics.
//!
//! Class 1 ("rise") is the positive class. All statistics are total
//! functions: a zero denominator (or a zero factor in the MCC radicand)
//! yields 0, matching common evaluation-library behavior.

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Confusion {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("prediction and label sequences differ in length ({predictions} vs {labels})")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("empty input")]
    EmptyInput,
}

/// Tallies a confusion matrix from parallel prediction/label sequences.
/// Classes must be 0 or 1.
pub fn confusion(predictions: &[u8], labels: &[u8]) -> Result<Confusion, MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut c = Confusion::default();
    for (&pred, &label) in predictions.iter().zip(labels) {
        debug_assert!(pred <= 1 && label <= 1, "classes must be 0 or 1");
        match (pred, label) {
            (1, 1) => c.true_positives += 1,
            (1, 0) => c.false_positives += 1,
            (0, 0) => c.true_negatives += 1,
            _ => c.false_negatives += 1,
        }
    }
    Ok(c)
}

impl Confusion {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_count: u64) -> Self {
        Confusion {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_count,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    /// True positive rate, `TP / (TP + FN)`.
    pub fn sensitivity(&self) -> f64 {
        ratio(self.true_positives, self.true_positives + self.false_negatives)
    }

    /// True negative rate, `TN / (TN + FP)`.
    pub fn specificity(&self) -> f64 {
        ratio(self.true_negatives, self.true_negatives + self.false_positives)
    }

    /// `(TP + TN) / (TP + FP + TN + FN)`.
    pub fn accuracy(&self) -> f64 {
        ratio(self.true_positives + self.true_negatives, self.total())
    }

    /// Matthews correlation coefficient,
    /// `(TP·TN − FP·FN) / √((TP+FP)(TP+FN)(TN+FP)(TN+FN))`.
    pub fn mcc(&self) -> f64 {
        let (tp, fp) = (self.true_positives as f64, self.false_positives as f64);
        let (tn, fn_) = (self.true_negatives as f64, self.false_negatives as f64);
        let radicand = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if radicand == 0.0 {
            return 0.0;
        }
        (tp * tn - fp * fn_) / radicand.sqrt()
    }

    /// The confusion matrix with the positive/negative classes exchanged.
    pub fn class_swapped(&self) -> Confusion {
        Confusion {
            true_positives: self.true_negatives,
            false_positives: self.false_negatives,
            true_negatives: self.true_positives,
            false_negatives: self.false_positives,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

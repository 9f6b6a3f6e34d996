//! Confusion matrix and the per-class / aggregate classification report.
//!
//! Rows of the confusion matrix are true classes and columns are predicted
//! classes. Undefined ratios (empty row or column) are reported as 0.0 and
//! flagged.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::data::{ActivityClass, Dataset, Examples, NormStats};
use crate::error::invalid;
use crate::nn::{argmax, Network};
use crate::{Result, NUM_CLASSES};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self { n_classes, counts: vec![0; n_classes * n_classes] }
    }

    pub fn from_labels(truths: &[usize], preds: &[usize], n_classes: usize) -> Result<Self> {
        if truths.len() != preds.len() {
            return Err(invalid!("{} true labels but {} predictions", truths.len(), preds.len()));
        }
        if truths.is_empty() {
            return Err(invalid!("no labels to tabulate"));
        }
        let mut cm = Self::new(n_classes);
        for (i, (&t, &p)) in truths.iter().zip(preds).enumerate() {
            if t >= n_classes || p >= n_classes {
                return Err(invalid!("entry {i}: class ({t}, {p}) outside 0..{n_classes}"));
            }
            cm.counts[t * n_classes + p] += 1;
        }
        Ok(cm)
    }

    /// Builds a matrix from explicit rows.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid!("confusion matrix rows must all have length {n}"));
        }
        Ok(Self { n_classes: n, counts: rows.iter().flatten().copied().collect() })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Count of samples with true class `t` predicted as `p`.
    pub fn get(&self, t: usize, p: usize) -> u64 {
        self.counts[t * self.n_classes + p]
    }

    pub fn row(&self, t: usize) -> &[u64] {
        &self.counts[t * self.n_classes..(t + 1) * self.n_classes]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.n_classes).map(|t| self.row(t).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.n_classes).map(|p| (0..self.n_classes).map(|t| self.get(t, p)).sum()).collect()
    }
}

/// Confusion matrix over the four activity classes.
pub fn confusion_matrix(truths: &[usize], preds: &[usize]) -> Result<ConfusionMatrix> {
    ConfusionMatrix::from_labels(truths, preds, NUM_CLASSES)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// No sample was predicted as this class.
    pub precision_undefined: bool,
    /// The class has no true samples.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub total: u64,
}

impl ClassificationReport {
    /// True if any per-class ratio hit a zero denominator.
    pub fn has_undefined(&self) -> bool {
        self.per_class.iter().any(|m| m.precision_undefined || m.recall_undefined)
    }
}

pub fn macro_average(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn weighted_average(values: &[f64], supports: &[u64]) -> f64 {
    let total: u64 = supports.iter().sum();
    if total == 0 {
        return 0.0;
    }
    values.iter().zip(supports).map(|(v, &s)| v * s as f64).sum::<f64>() / total as f64
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn classification_report(cm: &ConfusionMatrix) -> Result<ClassificationReport> {
    let total = cm.total();
    if total == 0 {
        return Err(invalid!("confusion matrix is empty"));
    }
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|c| {
            let tp = cm.get(c, c);
            let (precision, precision_undefined) = ratio(tp, cols[c]);
            let (recall, recall_undefined) = ratio(tp, rows[c]);
            let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
            ClassMetrics { precision, recall, f1, support: rows[c], precision_undefined, recall_undefined }
        })
        .collect();
    let column = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).collect::<Vec<f64>>();
    let (p, r, f) = (column(|m| m.precision), column(|m| m.recall), column(|m| m.f1));
    Ok(ClassificationReport {
        accuracy: cm.trace() as f64 / total as f64,
        macro_avg: Averages { precision: macro_average(&p), recall: macro_average(&r), f1: macro_average(&f) },
        weighted_avg: Averages {
            precision: weighted_average(&p, &rows),
            // Σ (tp_c / support_c) · support_c / total, with the products cancelled
            // exactly rather than rounded
            recall: cm.trace() as f64 / total as f64,
            f1: weighted_average(&f, &rows),
        },
        per_class,
        total,
    })
}

fn class_label(idx: usize, n: usize) -> alloc::string::String {
    match ActivityClass::from_index(idx) {
        Some(c) if n == NUM_CLASSES => c.name().into(),
        _ => format!("class {idx}"),
    }
}

/// Plain-text table: one row per class, then accuracy, macro and weighted
/// averages. Rates are shown with two decimals.
impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.per_class.len();
        writeln!(f, "{:>20} {:>10} {:>10} {:>10} {:>10}", "", "precision", "recall", "f1-score", "support")?;
        writeln!(f)?;
        for (i, m) in self.per_class.iter().enumerate() {
            writeln!(
                f,
                "{:>20} {:>10.2} {:>10.2} {:>10.2} {:>10}",
                class_label(i, n),
                m.precision,
                m.recall,
                m.f1,
                m.support
            )?;
        }
        writeln!(f)?;
        writeln!(f, "{:>20} {:>10} {:>10} {:>10.2} {:>10}", "accuracy", "", "", self.accuracy, self.total)?;
        for (name, avg) in [("macro avg", self.macro_avg), ("weighted avg", self.weighted_avg)] {
            writeln!(
                f,
                "{:>20} {:>10.2} {:>10.2} {:>10.2} {:>10}",
                name, avg.precision, avg.recall, avg.f1, self.total
            )?;
        }
        Ok(())
    }
}

/// Accuracy, mean loss and argmax predictions of `net` on `examples`.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub accuracy: f64,
    pub mean_loss: f64,
    pub predictions: Vec<usize>,
}

pub fn score_examples(net: &Network, examples: &Examples) -> Result<Score> {
    if examples.is_empty() {
        return Err(invalid!("no examples to score"));
    }
    let mut loss = 0.0f64;
    let mut correct = 0usize;
    let mut predictions = Vec::with_capacity(examples.len());
    for (x, &t) in examples.inputs.iter().zip(&examples.targets) {
        let (probs, l) = net.evaluate_sample(x, t)?;
        let p = argmax(&probs);
        correct += usize::from(p == t);
        loss += l;
        predictions.push(p);
    }
    let n = examples.len() as f64;
    Ok(Score { accuracy: correct as f64 / n, mean_loss: loss / n, predictions })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub report: ClassificationReport,
    pub mean_loss: f64,
    pub predictions: Vec<usize>,
}

pub fn evaluate_examples(net: &Network, examples: &Examples) -> Result<Evaluation> {
    let score = score_examples(net, examples)?;
    let confusion = confusion_matrix(&examples.targets, &score.predictions)?;
    let report = classification_report(&confusion)?;
    Ok(Evaluation { confusion, report, mean_loss: score.mean_loss, predictions: score.predictions })
}

/// Normalizes `ds` with `norm` and scores every sample.
pub fn evaluate(net: &Network, ds: &Dataset, norm: &NormStats) -> Result<Evaluation> {
    evaluate_examples(net, &ds.to_examples(norm)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_and_off_diagonal() {
        let cm = confusion_matrix(&[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap();
        assert_eq!(cm.trace(), 4);
        assert_eq!(cm.total(), 4);
        let cm = confusion_matrix(&[0, 0], &[1, 1]).unwrap();
        assert_eq!(cm.get(0, 1), 2);
        assert_eq!(cm.total(), 2);
        assert_eq!(cm.trace(), 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(confusion_matrix(&[0, 1], &[0]).is_err());
        assert!(confusion_matrix(&[], &[]).is_err());
        assert!(confusion_matrix(&[4], &[0]).is_err());
        assert!(classification_report(&ConfusionMatrix::new(4)).is_err());
    }

    #[test]
    fn diagonal_report_is_perfect() {
        let cm = confusion_matrix(&[0, 1, 1, 2, 3, 3, 3], &[0, 1, 1, 2, 3, 3, 3]).unwrap();
        let r = classification_report(&cm).unwrap();
        assert_eq!(r.accuracy, 1.0);
        for m in &r.per_class {
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
        assert!(!r.has_undefined());
    }

    #[test]
    fn two_class_hand_example() {
        let cm = ConfusionMatrix::from_rows(&[vec![8, 2], vec![1, 9]]).unwrap();
        let r = classification_report(&cm).unwrap();
        assert_relative_eq!(r.per_class[0].precision, 8.0 / 9.0, epsilon = 1e-12);
        assert_relative_eq!(r.per_class[0].recall, 0.8, epsilon = 1e-12);
        // 2 · (8/9) · 0.8 / (8/9 + 0.8) = 16/19
        assert_relative_eq!(r.per_class[0].f1, 16.0 / 19.0, epsilon = 1e-12);
        assert_relative_eq!(r.accuracy, 0.85, epsilon = 1e-12);
    }

    #[test]
    fn zero_column_is_flagged() {
        let cm = confusion_matrix(&[0, 1, 2, 3], &[0, 0, 0, 0]).unwrap();
        let r = classification_report(&cm).unwrap();
        assert!(r.per_class[1].precision_undefined);
        assert_eq!(r.per_class[1].precision, 0.0);
        assert_eq!(r.per_class[1].f1, 0.0);
        assert!(r.has_undefined());
    }

    #[test]
    fn published_average_arithmetic() {
        let precision = [0.95, 0.99, 1.00, 0.97];
        let support = [122, 108, 41, 98];
        assert!((macro_average(&precision) - 0.9775).abs() < 5e-4);
        // (0.95·122 + 0.99·108 + 41 + 0.97·98) / 369 = 358.88 / 369
        assert_relative_eq!(weighted_average(&precision, &support), 358.88 / 369.0, epsilon = 1e-12);
        assert!((weighted_average(&precision, &support) - 0.9726).abs() < 5e-4);
    }

    #[test]
    fn display_layout() {
        let cm = confusion_matrix(&[0, 1, 2, 3], &[0, 1, 2, 2]).unwrap();
        let text = alloc::string::ToString::to_string(&classification_report(&cm).unwrap());
        assert!(text.contains("Presence of Smoke"));
        assert!(text.contains("weighted avg"));
        assert!(text.contains("0.67"));
    }
}

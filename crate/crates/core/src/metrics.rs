//! Binary confusion matrices, derived scores and model comparison.
//!
//! Label 1 is the positive ("threat") class.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("length mismatch: {0} true labels vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("label {0} is not 0 or 1")]
    NonBinaryLabel(u8),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("comparison needs at least 2 reports, got {0}")]
    TooFewModels(usize),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn new(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        ConfusionMatrix { tn, fp, fn_, tp }
    }

    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    /// The matrix obtained by swapping truth and prediction.
    pub fn transposed(&self) -> Self {
        ConfusionMatrix::new(self.tn, self.fn_, self.fp, self.tp)
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (1, 1) => cm.tp += 1,
            _ => return Err(MetricsError::NonBinaryLabel(if t > 1 { t } else { p })),
        }
    }
    Ok(cm)
}

/// Which score hit a zero denominator and was defined as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroDivision {
    Precision,
    Recall,
    F1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub flags: Vec<ZeroDivision>,
}

pub fn scores(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let mut flags = Vec::new();
    let ratio = |num: u64, den: u64, flag: ZeroDivision, flags: &mut Vec<ZeroDivision>| {
        if den == 0 {
            flags.push(flag);
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(cm.tp, cm.tp + cm.fp, ZeroDivision::Precision, &mut flags);
    let recall = ratio(cm.tp, cm.tp + cm.fn_, ZeroDivision::Recall, &mut flags);
    let f1 = if precision + recall == 0.0 {
        flags.push(ZeroDivision::F1);
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(MetricsReport {
        accuracy: (cm.tp + cm.tn) as f64 / total as f64,
        precision,
        recall,
        f1,
        flags,
    })
}

/// Serialized evaluation result: `{name, confusion, accuracy, precision,
/// recall, f1, flags}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub confusion: ConfusionMatrix,
    #[serde(flatten)]
    pub report: MetricsReport,
}

impl EvaluationRecord {
    pub fn from_confusion(name: Option<String>, confusion: ConfusionMatrix) -> Result<Self> {
        Ok(EvaluationRecord {
            name,
            confusion,
            report: scores(&confusion)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub name: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Sorted by accuracy, best first; ties keep input order.
    pub entries: Vec<ComparisonEntry>,
    pub winner: String,
}

pub fn compare(reports: &[(String, MetricsReport)]) -> Result<ComparisonReport> {
    if reports.len() < 2 {
        return Err(MetricsError::TooFewModels(reports.len()));
    }
    let mut entries: Vec<ComparisonEntry> = reports
        .iter()
        .map(|(name, r)| ComparisonEntry {
            name: name.clone(),
            accuracy: r.accuracy,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
        })
        .collect();
    // stable sort keeps input order on ties
    entries.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy));
    let winner = entries[0].name.clone();
    Ok(ComparisonReport { entries, winner })
}

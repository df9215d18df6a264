//! Confusion-matrix statistics, per-class F1, and the macro-average F1.
//!
//! The positive class is the minority (label 1) throughout. Degenerate 0/0
//! ratios are defined as 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts with minority (label 1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

/// Per-class F1 plus their unweighted mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub f1_major: f64,
    pub f1_minor: f64,
    pub macro_f1: f64,
}

impl ScorePair {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let (f1_major, f1_minor) = f1_per_class(cm);
        ScorePair {
            f1_major,
            f1_minor,
            macro_f1: macro_f1(f1_major, f1_minor),
        }
    }
}

/// Counts prediction/label agreement. Inputs must be equal-length, non-empty
/// {0,1} vectors.
pub fn confusion(predictions: &[u8], labels: &[u8]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput {
            what: "prediction vector",
        });
    }
    debug_assert!(predictions.iter().chain(labels).all(|&v| v <= 1));
    let mut cm = ConfusionMatrix {
        true_pos: 0,
        false_pos: 0,
        false_neg: 0,
        true_neg: 0,
    };
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p, y) {
            (1, 1) => cm.true_pos += 1,
            (1, 0) => cm.false_pos += 1,
            (0, 1) => cm.false_neg += 1,
            _ => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

/// `(f1_major, f1_minor)`. The minority F1 is `2tp/(2tp+fp+fn)`; the
/// majority F1 is the same formula with the classes swapped.
pub fn f1_per_class(cm: &ConfusionMatrix) -> (f64, f64) {
    let minor = f1_from_counts(cm.true_pos, cm.false_pos, cm.false_neg);
    let major = f1_from_counts(cm.true_neg, cm.false_neg, cm.false_pos);
    (major, minor)
}

fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Equally weighted average of the two per-class F1 scores.
pub fn macro_f1(f1_major: f64, f1_minor: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&f1_major) && (0.0..=1.0).contains(&f1_minor));
    (f1_major + f1_minor) / 2.0
}

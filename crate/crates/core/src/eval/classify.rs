use alloc::vec::Vec;

use super::EvalError;
use crate::corpus::Label;

/// A metric whose denominator was zero and was reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MetricFlag {
    NoPositivePredictions,
    NoPositiveLabels,
    UndefinedF1,
    NoAbnormalVideos,
    EmptyTextPair,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub flags: Vec<MetricFlag>,
}

/// Binary metrics with Abnormal as the positive class.
///
/// `None` is an unextractable prediction: always wrong, never a positive
/// prediction.
pub fn classification_metrics(predictions: &[Option<Label>], labels: &[Label]) -> Result<ClassificationMetrics, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    let (mut tp, mut fp, mut fneg, mut correct) = (0usize, 0usize, 0usize, 0usize);
    for (p, &y) in predictions.iter().zip(labels) {
        if *p == Some(y) {
            correct += 1;
        }
        match (p.map(Label::is_abnormal).unwrap_or(false), y.is_abnormal()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    let mut flags = Vec::new();
    let precision = if tp + fp == 0 {
        flags.push(MetricFlag::NoPositivePredictions);
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fneg == 0 {
        flags.push(MetricFlag::NoPositiveLabels);
        0.0
    } else {
        tp as f64 / (tp + fneg) as f64
    };
    let f1 = if precision + recall == 0.0 {
        flags.push(MetricFlag::UndefinedF1);
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ClassificationMetrics {
        accuracy: correct as f64 / labels.len() as f64,
        precision,
        recall,
        f1,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Abnormal as A, Normal as N};

    #[test]
    fn perfect_predictions() {
        let m = classification_metrics(&[Some(A), Some(N), Some(A)], &[A, N, A]).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        assert!(m.flags.is_empty());
    }

    #[test]
    fn half_recall() {
        let m = classification_metrics(&[Some(A), Some(N)], &[A, A]).unwrap();
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 0.5);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn no_positive_predictions_is_flagged() {
        let m = classification_metrics(&[Some(N), None], &[A, N]).unwrap();
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.accuracy, 0.0);
        assert!(m.flags.contains(&MetricFlag::NoPositivePredictions));
    }

    #[test]
    fn mismatched_lengths() {
        assert!(matches!(
            classification_metrics(&[Some(N)], &[N, A]),
            Err(EvalError::LengthMismatch { .. })
        ));
    }
}

//! Brier score and F1-family classification metrics. The positive class is label 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub brier: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

fn check_lengths(probs: &[[f64; 2]], labels: &[usize]) -> Result<()> {
    if probs.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if let Some(y) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Argument(format!("label {y} is not binary")));
    }
    Ok(())
}

/// Mean squared distance between each predicted distribution and its one-hot label.
pub fn brier(probs: &[[f64; 2]], labels: &[usize]) -> Result<f64> {
    check_lengths(probs, labels)?;
    if probs.is_empty() {
        return Err(Error::Argument("brier score of an empty batch".into()));
    }
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(p, &y)| {
            let d0 = p[0] - if y == 0 { 1.0 } else { 0.0 };
            let d1 = p[1] - if y == 1 { 1.0 } else { 0.0 };
            d0 * d0 + d1 * d1
        })
        .sum();
    Ok(total / probs.len() as f64)
}

/// Argmax class; a tie goes to the negative class.
pub fn predicted_class(p: &[f64; 2]) -> usize {
    usize::from(p[1] > p[0])
}

/// F1 from confusion counts; zero when the denominator is zero.
pub fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

pub fn classification_report(probs: &[[f64; 2]], labels: &[usize]) -> Result<EvalReport> {
    check_lengths(probs, labels)?;
    if probs.is_empty() {
        return Err(Error::Argument("classification report of an empty batch".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (p, &y) in probs.iter().zip(labels) {
        match (predicted_class(p), y) {
            (1, 1) => tp += 1,
            (1, _) => fp += 1,
            (_, 1) => fn_ += 1,
            _ => tn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(EvalReport {
        brier: brier(probs, labels)?,
        f1: f1_from_counts(tp, fp, fn_),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        tp,
        fp,
        fn_,
        tn,
    })
}

// SPDX-License-Identifier: Apache-2.0

//! Binary-QA and MME scoring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts with "yes" as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, predicted_yes: bool, actual_yes: bool) {
        match (predicted_yes, actual_yes) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

/// Accuracy, precision, recall and F1. A metric whose denominator is zero is
/// `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopeMetrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn pope_metrics(c: &ConfusionCounts) -> Result<PopeMetrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::invalid_input("no evaluated records"));
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(PopeMetrics { accuracy: (c.tp + c.tn) as f64 / total as f64, precision, recall, f1 })
}

/// MME subtask score: 100 * (question accuracy + per-image both-correct
/// accuracy), at most 200.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmeScore {
    pub acc: f64,
    pub acc_plus: f64,
    pub score: f64,
    pub images: u64,
}

/// Scores per-image verdict pairs (`true` = answered correctly).
pub fn mme_score_pairs(verdicts: &[[bool; 2]]) -> Result<MmeScore> {
    if verdicts.is_empty() {
        return Err(Error::invalid_input("MME score over zero images"));
    }
    let images = verdicts.len() as u64;
    let correct: u64 = verdicts.iter().map(|v| v.iter().filter(|&&c| c).count() as u64).sum();
    let both: u64 = verdicts.iter().filter(|v| v[0] && v[1]).count() as u64;
    let acc = correct as f64 / (2 * images) as f64;
    let acc_plus = both as f64 / images as f64;
    Ok(MmeScore { acc, acc_plus, score: 100.0 * (acc + acc_plus), images })
}

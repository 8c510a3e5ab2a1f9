//! Classification metrics computed from predicted class probabilities.
//!
//! All built-in detectors are binary with positive class 1 ("fake").
//! Predicted class is the per-row argmax with ties resolved to the lowest
//! index; precision/recall/f1 are defined as 0 when their denominator is 0
//! so that validation values stay totally ordered.

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("shape mismatch: {0} probability rows vs {1} labels")]
    ShapeMismatch(usize, usize),
    #[error("label {0} out of range for {1} classes")]
    LabelOutOfRange(i64, usize),
    #[error("unknown metric name: {0}")]
    UnknownMetric(String),
    #[error("auc is undefined: labels contain a single class")]
    UndefinedAuc,
    #[error("probability row {0} sums to {1}, expected 1")]
    NotNormalized(usize, f64),
}

pub const KNOWN_METRICS: [&str; 5] = ["accuracy", "precision", "recall", "f1", "auc"];

/// Binary confusion counts with positive class 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn from_predictions(preds: &[usize], labels: &[i64]) -> Self {
        let mut c = Self::default();
        for (&p, &l) in preds.iter().zip(labels) {
            match (p == 1, l == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Flat metric-name -> value map; serializes to one flat JSON object.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricReport {
    pub values: BTreeMap<String, f64>,
}

impl MetricReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::fmt::Display for MetricReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, v) in &self.values {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Per-row argmax, lowest index wins ties.
pub fn argmax_predictions(probs: ArrayView2<'_, f64>) -> Vec<usize> {
    probs
        .outer_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Compute the requested metrics over a whole evaluation set.
pub fn classification_metrics(
    probs: ArrayView2<'_, f64>,
    labels: &[i64],
    metric_names: &[String],
) -> Result<MetricReport, MetricsError> {
    let (b, c) = probs.dim();
    if b == 0 {
        return Err(MetricsError::EmptyBatch);
    }
    if labels.len() != b {
        return Err(MetricsError::ShapeMismatch(b, labels.len()));
    }
    for (i, row) in probs.outer_iter().enumerate() {
        let sum: f64 = row.sum();
        if (sum - 1.0).abs() > 1e-5 {
            return Err(MetricsError::NotNormalized(i, sum));
        }
    }
    if let Some(&bad) = labels.iter().find(|&&l| l < 0 || l as usize >= c) {
        return Err(MetricsError::LabelOutOfRange(bad, c));
    }
    let preds = argmax_predictions(probs);
    let counts = ConfusionCounts::from_predictions(&preds, labels);
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };

    let mut report = MetricReport::default();
    for name in metric_names {
        let value = match name.as_str() {
            "accuracy" => (counts.tp + counts.tn) as f64 / b as f64,
            "precision" => ratio(counts.tp, counts.tp + counts.fp),
            "recall" => ratio(counts.tp, counts.tp + counts.fn_),
            "f1" => {
                let p = ratio(counts.tp, counts.tp + counts.fp);
                let r = ratio(counts.tp, counts.tp + counts.fn_);
                if p + r == 0.0 {
                    0.0
                } else {
                    2.0 * p * r / (p + r)
                }
            }
            "auc" => {
                let scores: Vec<f64> = probs.column(c - 1).iter().cloned().collect();
                auc_score(&scores, labels)?
            }
            other => return Err(MetricsError::UnknownMetric(other.to_string())),
        };
        report.values.insert(name.clone(), value);
    }
    Ok(report)
}

/// Area under the ROC curve: the fraction of (positive, negative) pairs
/// ranked correctly, ties counting 0.5. Computed in O(B log B) via average
/// ranks.
pub fn auc_score(probs_positive: &[f64], labels: &[i64]) -> Result<f64, MetricsError> {
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::UndefinedAuc);
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| probs_positive[a].total_cmp(&probs_positive[b]));
    // average rank within tie groups, ranks 1-based
    let mut rank = vec![0.0f64; labels.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && probs_positive[order[j + 1]] == probs_positive[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            rank[idx] = avg;
        }
        i = j + 1;
    }
    let rank_sum_pos: f64 = labels
        .iter()
        .zip(&rank)
        .filter(|(&l, _)| l == 1)
        .map(|(_, &r)| r)
        .sum();
    let auc = (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos * n_neg) as f64;
    Ok(auc)
}

//! Binary classification metrics.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Experiment};
use crate::gbdt::{sigmoid, TreeEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
    pub class_balance: f64,
}

/// Accuracy and F1 at the given probability threshold (0.5 in the
/// replication pipeline). F1 is defined as 0 when precision + recall = 0.
pub fn evaluate(
    model: &TreeEnsemble,
    ds: &Dataset,
    experiment: Experiment,
    threshold: f64,
) -> Metrics {
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut tn = 0u64;
    let mut fn_ = 0u64;
    for s in ds.samples() {
        let p = sigmoid(model.margin_unchecked(&s.features));
        let predicted = p >= threshold;
        match (predicted, s.label(experiment)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let n = (tp + fp + tn + fn_) as f64;
    let accuracy = (tp + tn) as f64 / n;
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Metrics { accuracy, f1, class_balance: ds.class_balance(experiment) }
}

/// Weighted logistic loss of the first `n_trees` trees' margins.
pub fn weighted_log_loss(
    model: &TreeEnsemble,
    ds: &Dataset,
    experiment: Experiment,
    n_trees: usize,
) -> f64 {
    let mut loss = 0.0;
    let mut total_weight = 0.0;
    for s in ds.samples() {
        let margin = model
            .staged_margin(&s.features, n_trees)
            .expect("dataset conforms to model schema");
        let p = sigmoid(margin).clamp(1e-15, 1.0 - 1e-15);
        let y = if s.label(experiment) { 1.0 } else { 0.0 };
        loss -= s.weight * (y * p.ln() + (1.0 - y) * (1.0 - p).ln());
        total_weight += s.weight;
    }
    loss / total_weight
}

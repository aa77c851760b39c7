//! Histogram-based gradient-boosted decision trees with weighted logistic
//! loss.
//!
//! Each boosting round fits one tree to the weighted gradients
//! `g_i = w_i (p_i - y_i)` and hessians `h_i = w_i p_i (1 - p_i)` of the
//! current margins. Trees grow leaf-wise up to `max_leaves`, choosing splits
//! that maximize
//! `gain = 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)]`
//! over histogram bin boundaries; leaf values are `-lr * G/(H+l)`.

mod binning;
mod grid;
mod metrics;
mod train;
mod tree;

pub use grid::{default_grid, grid_search, CvRecord, GridError};
pub use metrics::{evaluate, weighted_log_loss, Metrics};
pub use train::{leaf_value, split_gain, train};
pub use tree::{SplitRule, TreeNode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Experiment;
use crate::schema::{FeatureKind, FeatureSchema};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub num_trees: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    pub l2_lambda: f64,
    pub max_bins: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            num_trees: 100,
            learning_rate: 0.1,
            max_leaves: 31,
            min_samples_leaf: 20,
            l2_lambda: 1.0,
            max_bins: 255,
        }
    }
}

impl Hyperparams {
    /// `num_trees = 0` is allowed (constant model).
    pub fn validate(&self) -> Result<(), TrainError> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.max_leaves >= 1
            && self.min_samples_leaf >= 1
            && self.l2_lambda >= 0.0
            && self.l2_lambda.is_finite()
            && (2..=256).contains(&self.max_bins);
        if ok {
            Ok(())
        } else {
            Err(TrainError::InvalidHyperparams(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("expected {want} features, got {got}")]
    FeatureCount { got: usize, want: usize },
    #[error("feature {feature}: categorical code {code} out of range")]
    CategoricalOutOfRange { feature: String, code: f64 },
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("unsupported model format version {0}")]
    Version(u32),
    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A trained boosted ensemble. Immutable; `margin(x) = base_score + sum of
/// routed leaf values` in log-odds units.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub base_score: f64,
    pub trees: Vec<TreeNode>,
    pub schema: FeatureSchema,
    pub hyperparams: Hyperparams,
}

impl TreeEnsemble {
    /// Log-odds margin for a schema-valid feature vector.
    pub fn predict_margin(&self, x: &[f64]) -> Result<f64, PredictError> {
        self.validate_input(x)?;
        Ok(self.margin_unchecked(x))
    }

    /// Sigmoid of the margin, clamped into the open interval (0, 1).
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, PredictError> {
        Ok(sigmoid(self.predict_margin(x)?).clamp(1e-15, 1.0 - 1e-15))
    }

    /// Margin using only the first `n_trees` trees.
    pub fn staged_margin(&self, x: &[f64], n_trees: usize) -> Result<f64, PredictError> {
        self.validate_input(x)?;
        let mut m = self.base_score;
        for t in &self.trees[..n_trees.min(self.trees.len())] {
            m += t.route(x);
        }
        Ok(m)
    }

    pub(crate) fn margin_unchecked(&self, x: &[f64]) -> f64 {
        let mut m = self.base_score;
        for t in &self.trees {
            m += t.route(x);
        }
        m
    }

    fn validate_input(&self, x: &[f64]) -> Result<(), PredictError> {
        if x.len() != self.schema.len() {
            return Err(PredictError::FeatureCount { got: x.len(), want: self.schema.len() });
        }
        for (j, spec) in self.schema.features().iter().enumerate() {
            if let FeatureKind::Categorical { categories } = spec.kind {
                let v = x[j];
                if !(v.fract() == 0.0 && v >= 0.0 && v < f64::from(categories)) {
                    return Err(PredictError::CategoricalOutOfRange {
                        feature: spec.name.clone(),
                        code: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Versioned JSON document; floats survive round-trips bit-exactly.
    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            base_score: self.base_score,
            hyperparams: self.hyperparams.clone(),
            schema: self.schema.clone(),
            trees: self.trees.clone(),
        };
        serde_json::to_string(&doc).expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<TreeEnsemble, ModelIoError> {
        let doc: ModelDocument = serde_json::from_str(json)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelIoError::Version(doc.format_version));
        }
        Ok(TreeEnsemble {
            base_score: doc.base_score,
            trees: doc.trees,
            schema: doc.schema,
            hyperparams: doc.hyperparams,
        })
    }

    pub fn save_json(&self, path: impl AsRef<std::path::Path>) -> Result<(), ModelIoError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<std::path::Path>) -> Result<TreeEnsemble, ModelIoError> {
        let text = std::fs::read_to_string(path)?;
        TreeEnsemble::from_json(&text)
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    base_score: f64,
    hyperparams: Hyperparams,
    schema: FeatureSchema,
    trees: Vec<TreeNode>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Convenience: predicted positive at the 0.5 threshold.
pub fn predict_label(model: &TreeEnsemble, x: &[f64]) -> Result<bool, PredictError> {
    Ok(model.predict_proba(x)? >= 0.5)
}

/// Train/test convenience used by the pipeline.
pub fn fit_and_evaluate(
    train_ds: &crate::data::Dataset,
    test_ds: &crate::data::Dataset,
    experiment: Experiment,
    hp: &Hyperparams,
    seed: u64,
) -> Result<(TreeEnsemble, Metrics, Metrics), TrainError> {
    let model = train(train_ds, experiment, hp, seed)?;
    let train_metrics = evaluate(&model, train_ds, experiment, 0.5);
    let test_metrics = evaluate(&model, test_ds, experiment, 0.5);
    Ok((model, train_metrics, test_metrics))
}

//! Gradient-boosted decision trees for weighted survey data, explained with
//! exact Shapley attributions.
//!
//! The crate covers the full analysis pipeline:
//!
//! - [`schema`] / [`data`]: the survey feature schema, weighted samples,
//!   occupation-derived binary labels, CSV ingestion.
//! - [`sampling`]: weighted stratified splits, k-fold assignment, weighted
//!   subsampling without replacement, bootstrap subsets.
//! - [`gbdt`]: histogram-based boosted trees with weighted logistic loss,
//!   grid search on cross-validated F1.
//! - [`shap`]: exact per-sample Shapley values, main effects, and pairwise
//!   interaction values in log-odds units, with brute-force oracles.
//! - [`analysis`]: importance rankings, cohort curves with confidence
//!   bands, dependence extracts, interaction heatmaps, Spearman matrices,
//!   robustness comparisons.
//! - [`synth`]: synthetic survey data with planted main and interaction
//!   effects for end-to-end validation.
//! - [`chart`]: standalone SVG renderings of the analysis products.
//!
//! Everything downstream of data ingestion is a pure function of its inputs
//! and an explicit 64-bit seed; reruns are byte-identical.

pub mod analysis;
pub mod chart;
pub mod data;
pub mod gbdt;
pub mod rng;
pub mod sampling;
pub mod schema;
pub mod shap;
pub mod synth;

pub use data::{Dataset, Experiment, Labels, Occupation, Provenance, Sample};
pub use gbdt::{Hyperparams, Metrics, TreeEnsemble};
pub use sampling::{SplitSpec, SplitWeighting};
pub use schema::{FeatureKind, FeatureSchema, FeatureSpec};
pub use shap::{InteractionTensor, ShapMatrix};

// Book chapters double as doc-tests so the guide's code stays compilable.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(DataModel, "../../../book/src/data-model.md");
    chapter!(Sampling, "../../../book/src/sampling.md");
    chapter!(Boosting, "../../../book/src/boosting.md");
    chapter!(Shapley, "../../../book/src/shapley.md");
    chapter!(Interactions, "../../../book/src/interactions.md");
    chapter!(Cohorts, "../../../book/src/cohort-analysis.md");
    chapter!(Pipeline, "../../../book/src/pipeline.md");
}

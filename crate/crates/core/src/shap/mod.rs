//! Exact Shapley attributions for tree ensembles: per-sample SHAP values,
//! main effects, and pairwise interaction values, all in log-odds margin
//! space, plus exponential-time brute-force oracles for verification.

mod brute;
mod expectation;
pub mod export;
mod path;

pub use brute::{
    interaction_brute_force, shap_brute_force, BruteForceError, BRUTE_FORCE_FEATURE_CAP,
    BRUTE_FORCE_INTERACTION_CAP,
};
pub use expectation::conditional_expectation;

use rayon::prelude::*;
use thiserror::Error;

use crate::data::Dataset;
use crate::gbdt::TreeEnsemble;
use path::{tree_contributions, Condition, PathScratch};

#[derive(Debug, Error)]
pub enum ShapError {
    #[error("dataset schema does not match the model schema")]
    SchemaMismatch,
}

/// Per-sample, per-feature attribution values plus a scalar base value.
///
/// For every sample i, `base_value + sum_j values[i][j]` equals the model
/// margin within 1e-6 relative tolerance (local accuracy).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapMatrix {
    pub base_value: f64,
    pub feature_names: Vec<String>,
    pub sample_ids: Vec<u64>,
    values: Vec<f64>,
    n_features: usize,
}

impl ShapMatrix {
    pub fn new(
        base_value: f64,
        feature_names: Vec<String>,
        sample_ids: Vec<u64>,
        values: Vec<f64>,
    ) -> Self {
        let n_features = feature_names.len();
        assert_eq!(values.len(), sample_ids.len() * n_features);
        ShapMatrix { base_value, feature_names, sample_ids, values, n_features }
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_features + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mean of |phi| per feature, in schema order.
    pub fn mean_abs(&self) -> Vec<f64> {
        let n = self.n_samples();
        let mut out = vec![0.0; self.n_features];
        for i in 0..n {
            for (j, v) in self.row(i).iter().enumerate() {
                out[j] += v.abs();
            }
        }
        for v in &mut out {
            *v /= n as f64;
        }
        out
    }
}

/// Per-sample symmetric feature-by-feature attribution matrices; the
/// diagonal holds main effects, off-diagonal entries the pairwise
/// interaction values.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTensor {
    pub base_value: f64,
    pub feature_names: Vec<String>,
    pub sample_ids: Vec<u64>,
    values: Vec<f64>,
    n_features: usize,
}

impl InteractionTensor {
    pub fn new(
        base_value: f64,
        feature_names: Vec<String>,
        sample_ids: Vec<u64>,
        values: Vec<f64>,
    ) -> Self {
        let n_features = feature_names.len();
        assert_eq!(values.len(), sample_ids.len() * n_features * n_features);
        InteractionTensor { base_value, feature_names, sample_ids, values, n_features }
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// The m*m attribution matrix of sample `i`, row-major.
    pub fn sample_matrix(&self, i: usize) -> &[f64] {
        let mm = self.n_features * self.n_features;
        &self.values[i * mm..(i + 1) * mm]
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.n_features + j) * self.n_features + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mean of |Phi_jk| over samples; symmetric, non-negative.
    pub fn mean_abs_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.n_features;
        let n = self.n_samples();
        let mut out = vec![vec![0.0; m]; m];
        for i in 0..n {
            let mat = self.sample_matrix(i);
            for j in 0..m {
                for k in 0..m {
                    out[j][k] += mat[j * m + k].abs();
                }
            }
        }
        for row in &mut out {
            for v in row {
                *v /= n as f64;
            }
        }
        out
    }
}

/// Cover-weighted expectation of the ensemble output: the attribution base.
pub fn base_value(model: &TreeEnsemble) -> f64 {
    model.base_score + model.trees.iter().map(|t| t.expectation()).sum::<f64>()
}

/// Exact SHAP values for every sample via the path-dependent algorithm.
///
/// Equals [`shap_brute_force`] on every instance small enough for the
/// oracle; per-sample work is embarrassingly parallel and the output is
/// independent of the parallelism degree.
pub fn shap_values(model: &TreeEnsemble, ds: &Dataset) -> Result<ShapMatrix, ShapError> {
    if ds.schema() != &model.schema {
        return Err(ShapError::SchemaMismatch);
    }
    let m = model.schema.len();
    let rows: Vec<Vec<f64>> = ds
        .samples()
        .par_iter()
        .map(|s| {
            let mut phi = vec![0.0; m];
            let mut scratch = PathScratch::default();
            for tree in &model.trees {
                tree_contributions(tree, &s.features, &mut phi, Condition::None, &mut scratch);
            }
            phi
        })
        .collect();

    let mut values = Vec::with_capacity(ds.len() * m);
    for row in rows {
        values.extend(row);
    }
    Ok(ShapMatrix::new(
        base_value(model),
        model.schema.names(),
        ds.samples().iter().map(|s| s.id).collect(),
        values,
    ))
}

/// Exact pairwise Shapley interaction values for every sample.
///
/// Off-diagonal entries come from differencing conditioned SHAP runs
/// (feature fixed in vs out), symmetrized so `Phi[j][k] == Phi[k][j]`
/// bit-exactly; the diagonal is `phi_j - sum_{k != j} Phi[j][k]`, so row
/// sums reproduce the SHAP values.
pub fn interaction_values(
    model: &TreeEnsemble,
    ds: &Dataset,
) -> Result<InteractionTensor, ShapError> {
    if ds.schema() != &model.schema {
        return Err(ShapError::SchemaMismatch);
    }
    let m = model.schema.len();

    // Which trees mention each feature; trees without it contribute
    // identical on/off runs, i.e. exactly zero.
    let mut trees_with: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut scratch_features = Vec::new();
    for (t, tree) in model.trees.iter().enumerate() {
        scratch_features.clear();
        tree.collect_features(&mut scratch_features);
        scratch_features.sort_unstable();
        scratch_features.dedup();
        for &f in &scratch_features {
            trees_with[f].push(t);
        }
    }

    let sample_matrices: Vec<Vec<f64>> = ds
        .samples()
        .par_iter()
        .map(|s| {
            let x = &s.features;
            let mut scratch = PathScratch::default();

            let mut phi = vec![0.0; m];
            for tree in &model.trees {
                tree_contributions(tree, x, &mut phi, Condition::None, &mut scratch);
            }

            // conditioned[c][j]: interaction estimate from conditioning on c.
            let mut conditioned = vec![0.0; m * m];
            let mut on = vec![0.0; m];
            let mut off = vec![0.0; m];
            for c in 0..m {
                if trees_with[c].is_empty() {
                    continue;
                }
                on.iter_mut().for_each(|v| *v = 0.0);
                off.iter_mut().for_each(|v| *v = 0.0);
                for &t in &trees_with[c] {
                    tree_contributions(&model.trees[t], x, &mut on, Condition::On(c), &mut scratch);
                    tree_contributions(
                        &model.trees[t],
                        x,
                        &mut off,
                        Condition::Off(c),
                        &mut scratch,
                    );
                }
                for j in 0..m {
                    if j != c {
                        conditioned[c * m + j] = (on[j] - off[j]) / 2.0;
                    }
                }
            }

            let mut mat = vec![0.0; m * m];
            for j in 0..m {
                for k in (j + 1)..m {
                    let sym = (conditioned[j * m + k] + conditioned[k * m + j]) / 2.0;
                    mat[j * m + k] = sym;
                    mat[k * m + j] = sym;
                }
            }
            for j in 0..m {
                let off_sum: f64 = (0..m).filter(|&k| k != j).map(|k| mat[j * m + k]).sum();
                mat[j * m + j] = phi[j] - off_sum;
            }
            mat
        })
        .collect();

    let mut values = Vec::with_capacity(ds.len() * m * m);
    for mat in sample_matrices {
        values.extend(mat);
    }
    Ok(InteractionTensor::new(
        base_value(model),
        model.schema.names(),
        ds.samples().iter().map(|s| s.id).collect(),
        values,
    ))
}

/// The interaction tensor's diagonal: each feature's attribution with all
/// pairwise interaction contributions removed.
pub fn main_effects(t: &InteractionTensor) -> ShapMatrix {
    let m = t.n_features();
    let mut values = Vec::with_capacity(t.n_samples() * m);
    for i in 0..t.n_samples() {
        let mat = t.sample_matrix(i);
        for j in 0..m {
            values.push(mat[j * m + j]);
        }
    }
    ShapMatrix::new(t.base_value, t.feature_names.clone(), t.sample_ids.clone(), values)
}

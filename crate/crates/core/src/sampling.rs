//! Weighted and stratified sampling primitives.
//!
//! All operations are pure functions of (inputs, seed). Weighted draws
//! without replacement use the exponential-keys scheme: sample i gets key
//! `-ln(1-u_i)/w_i` and the k smallest keys win, which selects each subset
//! with probability proportional to the sequential weighted draw.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, Experiment};
use crate::rng::{derive_seed, seeded_rng};

/// How stratified_split picks test members within each class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitWeighting {
    /// Probability proportional to survey weight.
    #[default]
    Weighted,
    /// Uniform within the class, ignoring weights.
    Uniform,
}

/// Split and fold parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub folds: usize,
    pub seed: u64,
    #[serde(default)]
    pub weighting: SplitWeighting,
}

impl SplitSpec {
    /// Defaults: 5% test fraction, 5 folds, weight-proportional sampling.
    pub fn new(seed: u64) -> Self {
        SplitSpec { test_fraction: 0.05, folds: 5, seed, weighting: SplitWeighting::Weighted }
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::new(0)
    }
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("test fraction {0} is not in (0, 1)")]
    BadFraction(f64),
    #[error("class {class} has {count} samples, too few for one test member at fraction {fraction}")]
    ClassTooSmall { class: &'static str, count: usize, fraction: f64 },
    #[error("both classes must be present")]
    SingleClass,
    #[error("folds must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    ClassSmallerThanFolds { class: &'static str, count: usize, folds: usize },
    #[error("requested {k} samples from a dataset of {n}")]
    SubsampleTooLarge { k: usize, n: usize },
    #[error("subset count must be at least 1")]
    NoSubsets,
    #[error("subset fraction {0} is not in (0, 1]")]
    BadSubsetFraction(f64),
}

/// Indices of a weighted draw of `k` items without replacement.
/// Ties on keys are broken by index; the result is sorted ascending.
fn weighted_indices_without_replacement(
    weights: &[f64],
    k: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    debug_assert!(k <= weights.len());
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.gen();
            ((-(1.0 - u).ln()) / w, i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut chosen: Vec<usize> = keyed[..k].iter().map(|&(_, i)| i).collect();
    chosen.sort_unstable();
    chosen
}

/// Split into train/test, stratified by the experiment label.
///
/// The test set takes exactly `floor(test_fraction * n_class)` members per
/// class, drawn without replacement with probability proportional to survey
/// weight (or uniformly, per `spec.weighting`). Train is the complement;
/// both preserve dataset order.
pub fn stratified_split(
    ds: &Dataset,
    experiment: Experiment,
    spec: &SplitSpec,
) -> Result<(Dataset, Dataset), SampleError> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(SampleError::BadFraction(spec.test_fraction));
    }
    let (pos, neg) = class_indices(ds, experiment);
    if pos.is_empty() || neg.is_empty() {
        return Err(SampleError::SingleClass);
    }

    let mut rng = seeded_rng(spec.seed);
    let mut test_indices = Vec::new();
    for (class, indices) in [("positive", &pos), ("negative", &neg)] {
        let take = (spec.test_fraction * indices.len() as f64).floor() as usize;
        if take == 0 {
            return Err(SampleError::ClassTooSmall {
                class,
                count: indices.len(),
                fraction: spec.test_fraction,
            });
        }
        let weights: Vec<f64> = match spec.weighting {
            SplitWeighting::Weighted => {
                indices.iter().map(|&i| ds.samples()[i].weight).collect()
            }
            SplitWeighting::Uniform => vec![1.0; indices.len()],
        };
        let local = weighted_indices_without_replacement(&weights, take, &mut rng);
        test_indices.extend(local.into_iter().map(|j| indices[j]));
    }
    test_indices.sort_unstable();

    let mut in_test = vec![false; ds.len()];
    for &i in &test_indices {
        in_test[i] = true;
    }
    let train_indices: Vec<usize> = (0..ds.len()).filter(|&i| !in_test[i]).collect();
    Ok((ds.subset(&train_indices), ds.subset(&test_indices)))
}

/// Stratified k-fold assignment over `ds`.
///
/// Returns `folds` pairs of (fold_train, fold_valid). Validation folds are
/// disjoint and cover the dataset; each class is dealt into folds after a
/// seeded shuffle, with the first `n_class % folds` folds getting one extra
/// member.
pub fn kfold(
    ds: &Dataset,
    experiment: Experiment,
    spec: &SplitSpec,
) -> Result<Vec<(Dataset, Dataset)>, SampleError> {
    if spec.folds < 2 {
        return Err(SampleError::TooFewFolds(spec.folds));
    }
    let (pos, neg) = class_indices(ds, experiment);
    if pos.is_empty() || neg.is_empty() {
        return Err(SampleError::SingleClass);
    }
    for (class, indices) in [("positive", &pos), ("negative", &neg)] {
        if indices.len() < spec.folds {
            return Err(SampleError::ClassSmallerThanFolds {
                class,
                count: indices.len(),
                folds: spec.folds,
            });
        }
    }

    let mut rng = seeded_rng(derive_seed(spec.seed, 0x6f6c64)); // distinct stream from splits
    let mut fold_of = vec![0usize; ds.len()];
    for indices in [&pos, &neg] {
        let mut shuffled = indices.clone();
        shuffle(&mut shuffled, &mut rng);
        let base = shuffled.len() / spec.folds;
        let extra = shuffled.len() % spec.folds;
        let mut cursor = 0;
        for f in 0..spec.folds {
            let size = base + usize::from(f < extra);
            for &i in &shuffled[cursor..cursor + size] {
                fold_of[i] = f;
            }
            cursor += size;
        }
    }

    let mut out = Vec::with_capacity(spec.folds);
    for f in 0..spec.folds {
        let valid: Vec<usize> = (0..ds.len()).filter(|&i| fold_of[i] == f).collect();
        let train: Vec<usize> = (0..ds.len()).filter(|&i| fold_of[i] != f).collect();
        out.push((ds.subset(&train), ds.subset(&valid)));
    }
    Ok(out)
}

/// Fisher-Yates with the crate RNG; deterministic under seed.
fn shuffle(indices: &mut [usize], rng: &mut impl Rng) {
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
}

/// Draw `k` distinct samples with probability proportional to weight.
pub fn weighted_subsample(ds: &Dataset, k: usize, seed: u64) -> Result<Dataset, SampleError> {
    if k > ds.len() {
        return Err(SampleError::SubsampleTooLarge { k, n: ds.len() });
    }
    let weights: Vec<f64> = ds.samples().iter().map(|s| s.weight).collect();
    let mut rng = seeded_rng(seed);
    let chosen = weighted_indices_without_replacement(&weights, k, &mut rng);
    Ok(ds.subset(&chosen))
}

/// Independent weighted draws of size `floor(fraction * n)`, one per subset,
/// with per-subset seeds derived from the master seed.
pub fn bootstrap_subsets(
    ds: &Dataset,
    count: usize,
    fraction: f64,
    seed: u64,
) -> Result<Vec<Dataset>, SampleError> {
    if count < 1 {
        return Err(SampleError::NoSubsets);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SampleError::BadSubsetFraction(fraction));
    }
    let k = ((fraction * ds.len() as f64).floor() as usize).max(1);
    (0..count)
        .map(|i| weighted_subsample(ds, k, derive_seed(seed, i as u64)))
        .collect()
}

fn class_indices(ds: &Dataset, experiment: Experiment) -> (Vec<usize>, Vec<usize>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, s) in ds.samples().iter().enumerate() {
        if s.label(experiment) {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    (pos, neg)
}

//! Grid search over hyperparameters, scored by mean validation F1 across
//! stratified folds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, Experiment};
use crate::gbdt::{evaluate, train, Hyperparams};
use crate::sampling::{kfold, SampleError, SplitSpec};

/// One grid point's cross-validation outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvRecord {
    pub hyperparams: Hyperparams,
    /// None when every fold failed to train.
    pub mean_f1: Option<f64>,
    pub fold_f1: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("fold construction failed: {0}")]
    Folds(#[from] SampleError),
    #[error("every grid point failed to train")]
    AllFailed,
}

/// Evaluate every grid point on the same fold assignment and return the
/// best hyperparameters (highest mean F1, ties broken by grid order) with
/// the full CV table. Training errors abort the grid point, not the search.
pub fn grid_search(
    train_ds: &Dataset,
    experiment: Experiment,
    grid: &[Hyperparams],
    spec: &SplitSpec,
) -> Result<(Hyperparams, Vec<CvRecord>), GridError> {
    if grid.is_empty() {
        return Err(GridError::EmptyGrid);
    }
    let folds = kfold(train_ds, experiment, spec)?;

    let mut records = Vec::with_capacity(grid.len());
    for hp in grid {
        let mut fold_f1 = Vec::with_capacity(folds.len());
        let mut error = None;
        for (fold_train, fold_valid) in &folds {
            match train(fold_train, experiment, hp, spec.seed) {
                Ok(model) => {
                    fold_f1.push(evaluate(&model, fold_valid, experiment, 0.5).f1);
                }
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            }
        }
        let mean_f1 = if error.is_none() {
            Some(fold_f1.iter().sum::<f64>() / fold_f1.len() as f64)
        } else {
            None
        };
        records.push(CvRecord { hyperparams: hp.clone(), mean_f1, fold_f1, error });
    }

    let best = records
        .iter()
        .filter_map(|r| r.mean_f1.map(|f1| (f1, &r.hyperparams)))
        .fold(None::<(f64, &Hyperparams)>, |acc, (f1, hp)| match acc {
            // Strictly-greater keeps the earliest grid point on ties.
            Some((best_f1, _)) if f1 <= best_f1 => acc,
            _ => Some((f1, hp)),
        });

    match best {
        Some((_, hp)) => Ok((hp.clone(), records)),
        None => Err(GridError::AllFailed),
    }
}

/// The default replication grid: learning_rate {0.05, 0.1} x max_leaves
/// {15, 31, 63} x num_trees {100, 200} x min_samples_leaf {20, 50}.
pub fn default_grid() -> Vec<Hyperparams> {
    let mut grid = Vec::new();
    for &learning_rate in &[0.05, 0.1] {
        for &max_leaves in &[15, 31, 63] {
            for &num_trees in &[100, 200] {
                for &min_samples_leaf in &[20, 50] {
                    grid.push(Hyperparams {
                        num_trees,
                        learning_rate,
                        max_leaves,
                        min_samples_leaf,
                        ..Hyperparams::default()
                    });
                }
            }
        }
    }
    grid
}

//! Property tests for sampling and correlation invariants.

use proptest::prelude::*;
use shapboost::analysis::spearman;
use shapboost::data::{Dataset, Provenance, Sample};
use shapboost::sampling::{kfold, stratified_split, SplitSpec};
use shapboost::{Experiment, FeatureSchema, FeatureSpec, Occupation};

fn dataset(n_pos: usize, n_neg: usize, seed_weights: u64) -> Dataset {
    let schema = FeatureSchema::new(vec![FeatureSpec::numeric("x", 0.0, 1.0)]).unwrap();
    let samples = (0..n_pos + n_neg)
        .map(|i| Sample {
            id: i as u64,
            features: vec![(i % 2) as f64],
            weight: 0.25 + ((i as u64).wrapping_mul(seed_weights | 1) % 97) as f64 / 24.0,
            occupation: if i < n_pos { Occupation::Blue } else { Occupation::Unemployed },
        })
        .collect();
    Dataset::new(schema, samples, Provenance::Synthetic).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_preserves_class_balance(
        n_pos in 300usize..1200,
        n_neg in 300usize..1200,
        seed in any::<u64>(),
        wseed in any::<u64>(),
    ) {
        let ds = dataset(n_pos, n_neg, wseed);
        let spec = SplitSpec::new(seed);
        let (train, test) = stratified_split(&ds, Experiment::Work, &spec).unwrap();
        let balance = ds.class_balance(Experiment::Work);
        prop_assert!((train.class_balance(Experiment::Work) - balance).abs() < 0.005);
        prop_assert_eq!(train.len() + test.len(), ds.len());
        // Disjoint by id.
        let mut ids: Vec<u64> =
            train.samples().iter().chain(test.samples()).map(|s| s.id).collect();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), ds.len());
    }

    #[test]
    fn folds_are_disjoint_and_cover(
        n_pos in 40usize..200,
        n_neg in 40usize..200,
        folds in 2usize..6,
        seed in any::<u64>(),
    ) {
        let ds = dataset(n_pos, n_neg, 3);
        let spec = SplitSpec { folds, ..SplitSpec::new(seed) };
        let assignment = kfold(&ds, Experiment::Work, &spec).unwrap();
        prop_assert_eq!(assignment.len(), folds);
        let mut seen = Vec::new();
        for (fold_train, fold_valid) in &assignment {
            prop_assert_eq!(fold_train.len() + fold_valid.len(), ds.len());
            seen.extend(fold_valid.samples().iter().map(|s| s.id));
        }
        seen.sort_unstable();
        let expected: Vec<u64> = (0..ds.len() as u64).collect();
        prop_assert_eq!(seen, expected);
    }

    #[test]
    fn spearman_invariant_under_monotone_transforms(
        xs in prop::collection::vec(0i32..200, 8..60),
        ys in prop::collection::vec(0i32..200, 8..60),
        scale in 1i32..40,
        shift in -50i32..50,
    ) {
        let n = xs.len().min(ys.len());
        let a: Vec<f64> = xs[..n].iter().map(|&v| v as f64).collect();
        let b: Vec<f64> = ys[..n].iter().map(|&v| v as f64).collect();
        let before = spearman(&a, &b);
        // Strictly increasing affine and cubic transforms keep ranks, so the
        // correlation is bit-identical.
        let ta: Vec<f64> = a.iter().map(|v| f64::from(scale) * v + f64::from(shift)).collect();
        let tb: Vec<f64> = b.iter().map(|v| v * v * v).collect();
        let after = spearman(&ta, &tb);
        prop_assert_eq!(before.to_bits(), after.to_bits());
    }
}

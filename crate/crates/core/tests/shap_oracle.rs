//! Fast-path attribution against the brute-force Shapley oracles on
//! randomized small ensembles, plus the algebraic identities every
//! attribution matrix and interaction tensor must satisfy.

mod common;

use common::{random_ensemble, random_x};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shapboost::data::{Dataset, Provenance, Sample};
use shapboost::gbdt::{SplitRule, TreeNode};
use shapboost::shap::{
    conditional_expectation, interaction_brute_force, interaction_values, main_effects,
    shap_brute_force, shap_values,
};
use shapboost::{FeatureSchema, FeatureSpec, Hyperparams, Occupation, TreeEnsemble};

fn dataset_from_rows(schema: &FeatureSchema, rows: Vec<Vec<f64>>) -> Dataset {
    let samples = rows
        .into_iter()
        .enumerate()
        .map(|(i, features)| Sample {
            id: i as u64,
            features,
            weight: 1.0,
            occupation: if i % 2 == 0 { Occupation::Blue } else { Occupation::Unemployed },
        })
        .collect();
    Dataset::new(schema.clone(), samples, Provenance::Synthetic).unwrap()
}

#[test]
fn fast_shap_matches_brute_force_on_random_ensembles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD);
    let mut worst = 0.0f64;
    for case in 0..120 {
        let m = 2 + (case % 11); // 2..=12 features
        let model = random_ensemble(m, 10, 4, &mut rng);
        let rows: Vec<Vec<f64>> = (0..4).map(|_| random_x(&model.schema, &mut rng)).collect();
        let ds = dataset_from_rows(&model.schema, rows.clone());
        let fast = shap_values(&model, &ds).unwrap();
        for (i, x) in rows.iter().enumerate() {
            let (base, phi) = shap_brute_force(&model, x).unwrap();
            assert!((base - fast.base_value).abs() <= 1e-9, "base {base} vs {}", fast.base_value);
            for j in 0..m {
                worst = worst.max((phi[j] - fast.value(i, j)).abs());
            }
        }
    }
    assert!(worst <= 1e-8, "max |fast - oracle| = {worst:.3e}");
}

#[test]
fn fast_interactions_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1234);
    let mut worst = 0.0f64;
    for case in 0..30 {
        let m = 2 + (case % 7); // 2..=8 features
        let model = random_ensemble(m, 8, 4, &mut rng);
        let rows: Vec<Vec<f64>> = (0..2).map(|_| random_x(&model.schema, &mut rng)).collect();
        let ds = dataset_from_rows(&model.schema, rows.clone());
        let tensor = interaction_values(&model, &ds).unwrap();
        for (i, x) in rows.iter().enumerate() {
            let (_, oracle) = interaction_brute_force(&model, x).unwrap();
            for j in 0..m {
                for k in 0..m {
                    worst = worst.max((oracle[j][k] - tensor.value(i, j, k)).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-8, "max |fast - oracle| = {worst:.3e}");
}

#[test]
fn local_accuracy_holds_on_random_ensembles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let model = random_ensemble(10, 10, 5, &mut rng);
        let rows: Vec<Vec<f64>> = (0..8).map(|_| random_x(&model.schema, &mut rng)).collect();
        let ds = dataset_from_rows(&model.schema, rows.clone());
        let fast = shap_values(&model, &ds).unwrap();
        for (i, x) in rows.iter().enumerate() {
            let margin = model.predict_margin(x).unwrap();
            let total: f64 = fast.base_value + fast.row(i).iter().sum::<f64>();
            let tol = 1e-6 * margin.abs().max(1.0);
            assert!((total - margin).abs() <= tol, "{total} vs {margin}");
        }
    }
}

#[test]
fn dummy_features_get_exactly_zero() {
    // Trees split only on feature 0; features 1 and 2 must receive 0.0.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let schema = FeatureSchema::new(vec![
        FeatureSpec::numeric("f0", -1.0, 1.0),
        FeatureSpec::numeric("f1", -1.0, 1.0),
        FeatureSpec::numeric("f2", -1.0, 1.0),
    ])
    .unwrap();
    let tree = TreeNode::Internal {
        feature_index: 0,
        split: SplitRule::Threshold(0.0),
        cover: 5.0,
        left: Box::new(TreeNode::Leaf { value: -1.5, cover: 2.0 }),
        right: Box::new(TreeNode::Leaf { value: 2.5, cover: 3.0 }),
    };
    let model = TreeEnsemble {
        base_score: 0.3,
        trees: vec![tree.clone(), tree],
        schema,
        hyperparams: Hyperparams::default(),
    };
    let rows: Vec<Vec<f64>> = (0..6).map(|_| random_x(&model.schema, &mut rng)).collect();
    let ds = dataset_from_rows(&model.schema, rows);
    let fast = shap_values(&model, &ds).unwrap();
    for i in 0..fast.n_samples() {
        assert_eq!(fast.value(i, 1), 0.0);
        assert_eq!(fast.value(i, 2), 0.0);
    }
}

#[test]
fn attribution_is_additive_across_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let a = random_ensemble(6, 5, 4, &mut rng);
    // Same schema, different trees.
    let mut b = random_ensemble(6, 5, 4, &mut rng);
    b.schema = a.schema.clone();
    let union = TreeEnsemble {
        base_score: a.base_score + b.base_score,
        trees: a.trees.iter().chain(&b.trees).cloned().collect(),
        schema: a.schema.clone(),
        hyperparams: Hyperparams::default(),
    };
    let rows: Vec<Vec<f64>> = (0..5).map(|_| random_x(&a.schema, &mut rng)).collect();
    let ds = dataset_from_rows(&a.schema, rows);
    let phi_a = shap_values(&a, &ds).unwrap();
    let phi_b = shap_values(&b, &ds).unwrap();
    let phi_u = shap_values(&union, &ds).unwrap();
    assert!(
        (phi_u.base_value - (phi_a.base_value + phi_b.base_value)).abs() < 1e-9,
        "bases must sum"
    );
    for i in 0..ds.len() {
        for j in 0..a.schema.len() {
            let sum = phi_a.value(i, j) + phi_b.value(i, j);
            assert!((phi_u.value(i, j) - sum).abs() <= 1e-9);
        }
    }
}

#[test]
fn interaction_tensor_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for _ in 0..10 {
        let model = random_ensemble(7, 6, 4, &mut rng);
        let rows: Vec<Vec<f64>> = (0..3).map(|_| random_x(&model.schema, &mut rng)).collect();
        let ds = dataset_from_rows(&model.schema, rows.clone());
        let tensor = interaction_values(&model, &ds).unwrap();
        let matrix = shap_values(&model, &ds).unwrap();
        let m = model.schema.len();
        for i in 0..ds.len() {
            // Symmetry is bit-exact.
            for j in 0..m {
                for k in 0..m {
                    assert_eq!(tensor.value(i, j, k).to_bits(), tensor.value(i, k, j).to_bits());
                }
            }
            // Row sums reproduce phi.
            for j in 0..m {
                let row_sum: f64 = (0..m).map(|k| tensor.value(i, j, k)).sum();
                assert!((row_sum - matrix.value(i, j)).abs() <= 1e-6);
            }
            // Base + total = margin.
            let total: f64 =
                (0..m).flat_map(|j| (0..m).map(move |k| (j, k)))
                    .map(|(j, k)| tensor.value(i, j, k))
                    .sum();
            let margin = model.predict_margin(&rows[i]).unwrap();
            assert!((tensor.base_value + total - margin).abs() <= 1e-6 * margin.abs().max(1.0));
        }
    }
}

#[test]
fn additive_model_has_exactly_zero_interactions() {
    // Two stumps on different features: a purely additive ensemble.
    let schema = FeatureSchema::new(vec![
        FeatureSpec::numeric("f0", -1.0, 1.0),
        FeatureSpec::numeric("f1", -1.0, 1.0),
        FeatureSpec::numeric("f2", -1.0, 1.0),
    ])
    .unwrap();
    let stump = |feature_index: usize, lv: f64, rv: f64| TreeNode::Internal {
        feature_index,
        split: SplitRule::Threshold(0.0),
        cover: 6.0,
        left: Box::new(TreeNode::Leaf { value: lv, cover: 2.0 }),
        right: Box::new(TreeNode::Leaf { value: rv, cover: 4.0 }),
    };
    let model = TreeEnsemble {
        base_score: 0.1,
        trees: vec![stump(0, -1.0, 0.5), stump(1, 2.0, -0.25)],
        schema: schema.clone(),
        hyperparams: Hyperparams::default(),
    };
    let rows = vec![
        vec![-0.5, -0.5, 0.0],
        vec![-0.5, 0.5, 0.3],
        vec![0.5, -0.5, -0.9],
        vec![0.5, 0.5, 1.0],
    ];
    let ds = dataset_from_rows(&schema, rows);
    let tensor = interaction_values(&model, &ds).unwrap();
    let matrix = shap_values(&model, &ds).unwrap();
    let effects = main_effects(&tensor);
    for i in 0..ds.len() {
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    assert_eq!(tensor.value(i, j, k), 0.0, "off-diagonal must be exactly 0");
                }
            }
            // Diagonal equals phi for additive models.
            assert!((tensor.value(i, j, j) - matrix.value(i, j)).abs() <= 1e-12);
            assert_eq!(effects.value(i, j), tensor.value(i, j, j));
        }
    }
}

#[test]
fn conditional_expectation_interpolates_from_empty_to_full() {
    let mut rng = ChaCha8Rng::seed_from_u64(1717);
    let model = random_ensemble(5, 4, 3, &mut rng);
    let x = random_x(&model.schema, &mut rng);
    let full: Vec<usize> = (0..model.schema.len()).collect();
    let margin = model.predict_margin(&x).unwrap();
    assert!((conditional_expectation(&model, &x, &full) - margin).abs() < 1e-12);
    // v(empty) equals the ensemble expectation.
    let base = shapboost::shap::base_value(&model);
    assert!((conditional_expectation(&model, &x, &[]) - base).abs() < 1e-12);
}

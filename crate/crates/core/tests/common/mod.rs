//! Shared helpers for integration tests: random small ensembles with valid
//! cover bookkeeping, and random schema-valid inputs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shapboost::gbdt::{SplitRule, TreeNode};
use shapboost::{FeatureKind, FeatureSchema, FeatureSpec, Hyperparams, TreeEnsemble};

/// Mixed numeric/categorical schema with `m` features.
pub fn random_schema(m: usize, rng: &mut ChaCha8Rng) -> FeatureSchema {
    let specs = (0..m)
        .map(|i| {
            if i >= 2 && rng.gen_bool(0.25) {
                FeatureSpec::categorical(&format!("f{i}"), rng.gen_range(2..=5))
            } else {
                FeatureSpec::numeric(&format!("f{i}"), -1.0, 1.0)
            }
        })
        .collect();
    FeatureSchema::new(specs).unwrap()
}

fn random_tree(schema: &FeatureSchema, depth: usize, rng: &mut ChaCha8Rng) -> TreeNode {
    if depth == 0 || rng.gen_bool(0.25) {
        return TreeNode::Leaf {
            value: rng.gen_range(-2.0..2.0),
            cover: rng.gen_range(0.5..10.0),
        };
    }
    let feature_index = rng.gen_range(0..schema.len());
    let split = match schema.feature(feature_index).kind {
        FeatureKind::Categorical { categories } => {
            let mut left: Vec<u32> =
                (0..categories).filter(|_| rng.gen_bool(0.5)).collect();
            if left.is_empty() {
                left.push(rng.gen_range(0..categories));
            }
            if left.len() == categories as usize {
                left.pop();
            }
            SplitRule::Categories(left)
        }
        _ => SplitRule::Threshold(rng.gen_range(-0.9..0.9)),
    };
    let left = random_tree(schema, depth - 1, rng);
    let right = random_tree(schema, depth - 1, rng);
    let cover = left.cover() + right.cover();
    TreeNode::Internal {
        feature_index,
        split,
        cover,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Random ensemble with consistent covers; depth capped at `max_depth`.
pub fn random_ensemble(
    m: usize,
    max_trees: usize,
    max_depth: usize,
    rng: &mut ChaCha8Rng,
) -> TreeEnsemble {
    let schema = random_schema(m, rng);
    let n_trees = rng.gen_range(1..=max_trees);
    let trees = (0..n_trees)
        .map(|_| random_tree(&schema, rng.gen_range(1..=max_depth), rng))
        .collect();
    TreeEnsemble {
        base_score: rng.gen_range(-1.0..1.0),
        trees,
        schema,
        hyperparams: Hyperparams::default(),
    }
}

/// Random schema-valid feature vector.
pub fn random_x(schema: &FeatureSchema, rng: &mut ChaCha8Rng) -> Vec<f64> {
    schema
        .features()
        .iter()
        .map(|f| match f.kind {
            FeatureKind::Numeric { min, max } => rng.gen_range(min..max),
            FeatureKind::Binary => f64::from(rng.gen_range(0..2)),
            FeatureKind::Categorical { categories } => f64::from(rng.gen_range(0..categories)),
        })
        .collect()
}

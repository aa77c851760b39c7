//! Path-dependent conditional expectation: the set function whose Shapley
//! values both the oracle and the fast algorithm compute.

use crate::gbdt::{TreeEnsemble, TreeNode};

/// Expected ensemble margin given the features in `subset` take x's values.
///
/// Per tree, traverse from the root: when the split feature is in the
/// subset, follow x's branch; otherwise recurse into both children and
/// combine them by cover-weighted average. Returns base_score plus the sum
/// over trees.
pub fn conditional_expectation(model: &TreeEnsemble, x: &[f64], subset: &[usize]) -> f64 {
    let mut mask = 0u64;
    for &j in subset {
        assert!(j < 64, "feature index {j} out of mask range");
        mask |= 1 << j;
    }
    expectation_masked(model, x, mask)
}

/// Bitmask variant used by the subset-enumerating oracles.
pub(crate) fn expectation_masked(model: &TreeEnsemble, x: &[f64], mask: u64) -> f64 {
    let mut total = model.base_score;
    for tree in &model.trees {
        total += tree_expectation(tree, x, mask);
    }
    total
}

fn tree_expectation(node: &TreeNode, x: &[f64], mask: u64) -> f64 {
    match node {
        TreeNode::Leaf { value, .. } => *value,
        TreeNode::Internal { feature_index, split, left, right, .. } => {
            if mask & (1 << *feature_index) != 0 {
                if split.goes_left(x[*feature_index]) {
                    tree_expectation(left, x, mask)
                } else {
                    tree_expectation(right, x, mask)
                }
            } else {
                let (cl, cr) = (left.cover(), right.cover());
                (cl * tree_expectation(left, x, mask) + cr * tree_expectation(right, x, mask))
                    / (cl + cr)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::{Hyperparams, SplitRule, TreeNode};
    use crate::schema::{FeatureSchema, FeatureSpec};

    fn two_feature_schema() -> FeatureSchema {
        FeatureSchema::new(vec![
            FeatureSpec::numeric("a", 0.0, 10.0),
            FeatureSpec::numeric("b", 0.0, 10.0),
        ])
        .unwrap()
    }

    fn stump_model(base: f64) -> TreeEnsemble {
        TreeEnsemble {
            base_score: base,
            trees: vec![TreeNode::Internal {
                feature_index: 0,
                split: SplitRule::Threshold(5.0),
                cover: 4.0,
                left: Box::new(TreeNode::Leaf { value: 2.0, cover: 3.0 }),
                right: Box::new(TreeNode::Leaf { value: 10.0, cover: 1.0 }),
            }],
            schema: two_feature_schema(),
            hyperparams: Hyperparams::default(),
        }
    }

    #[test]
    fn all_features_equals_margin() {
        let m = stump_model(0.5);
        let x = [7.0, 1.0];
        let margin = m.predict_margin(&x).unwrap();
        assert_eq!(conditional_expectation(&m, &x, &[0, 1]), margin);
    }

    #[test]
    fn empty_set_is_cover_weighted_mean() {
        let m = stump_model(1.0);
        // base + (3*2 + 1*10)/4 = 1 + 4 = 5
        assert_eq!(conditional_expectation(&m, &[0.0, 0.0], &[]), 5.0);
    }

    #[test]
    fn single_leaf_ignores_subset() {
        let m = TreeEnsemble {
            base_score: -1.0,
            trees: vec![TreeNode::Leaf { value: 3.0, cover: 10.0 }],
            schema: two_feature_schema(),
            hyperparams: Hyperparams::default(),
        };
        for subset in [&[][..], &[0][..], &[0, 1][..]] {
            assert_eq!(conditional_expectation(&m, &[1.0, 2.0], subset), 2.0);
        }
    }
}

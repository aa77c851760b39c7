//! Decision tree nodes and routing.

use serde::{Deserialize, Serialize};

/// How an internal node sends a sample left or right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Numeric/binary: `x <= threshold` goes left.
    Threshold(f64),
    /// Categorical: codes in the (sorted) set go left.
    Categories(Vec<u32>),
}

impl SplitRule {
    pub fn goes_left(&self, value: f64) -> bool {
        match self {
            SplitRule::Threshold(t) => value <= *t,
            SplitRule::Categories(set) => set.binary_search(&(value as u32)).is_ok(),
        }
    }
}

/// A tree node; `cover` is the weighted count of training samples that
/// reached the node, and drives conditional expectations downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature_index: usize,
        split: SplitRule,
        cover: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
        cover: f64,
    },
}

impl TreeNode {
    pub fn cover(&self) -> f64 {
        match self {
            TreeNode::Internal { cover, .. } | TreeNode::Leaf { cover, .. } => *cover,
        }
    }

    /// Leaf value reached by routing `x` down the tree.
    pub fn route(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Internal { feature_index, split, left, right, .. } => {
                    node = if split.goes_left(x[*feature_index]) { left } else { right };
                }
            }
        }
    }

    /// Cover-weighted expectation of the tree output.
    pub fn expectation(&self) -> f64 {
        match self {
            TreeNode::Leaf { value, .. } => *value,
            TreeNode::Internal { left, right, .. } => {
                let (cl, cr) = (left.cover(), right.cover());
                (cl * left.expectation() + cr * right.expectation()) / (cl + cr)
            }
        }
    }

    pub fn max_depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.max_depth().max(right.max_depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Push every split feature index into `out` (with repeats).
    pub fn collect_features(&self, out: &mut Vec<usize>) {
        if let TreeNode::Internal { feature_index, left, right, .. } = self {
            out.push(*feature_index);
            left.collect_features(out);
            right.collect_features(out);
        }
    }
}

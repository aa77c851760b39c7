//! Polynomial-time path-dependent Shapley attribution for a single tree.
//!
//! This walks every root-to-leaf path once while maintaining the set of
//! unique features on the path together with the proportion of subsets that
//! flow down (`pweight`), extending and unwinding the path so duplicate
//! splits on one feature are merged. A conditioning mode fixes one feature
//! as always-present or always-absent, which is what the pairwise
//! interaction computation differences.

use crate::gbdt::TreeNode;

#[derive(Debug, Clone, Copy, Default)]
struct PathElement {
    feature_index: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

/// Fix one feature in or out of the coalition game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Condition {
    None,
    /// Splits on the feature always follow x's branch; the feature earns
    /// no attribution itself.
    On(usize),
    /// Splits on the feature are averaged by cover; the feature earns no
    /// attribution itself.
    Off(usize),
}

impl Condition {
    fn feature(self) -> Option<usize> {
        match self {
            Condition::None => None,
            Condition::On(f) | Condition::Off(f) => Some(f),
        }
    }
}

/// Reusable path storage; one instance per worker.
#[derive(Default)]
pub(crate) struct PathScratch {
    storage: Vec<PathElement>,
}

impl PathScratch {
    fn ensure(&mut self, depth: usize) {
        let cap = (depth + 3) * (depth + 4) / 2;
        if self.storage.len() < cap {
            self.storage.resize(cap, PathElement::default());
        }
    }
}

/// Accumulate one tree's contributions for sample `x` into `phi`.
pub(crate) fn tree_contributions(
    tree: &TreeNode,
    x: &[f64],
    phi: &mut [f64],
    condition: Condition,
    scratch: &mut PathScratch,
) {
    scratch.ensure(tree.max_depth());
    recurse(tree, x, phi, &mut scratch.storage, 0, 0, 1.0, 1.0, None, condition, 1.0);
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    node: &TreeNode,
    x: &[f64],
    phi: &mut [f64],
    storage: &mut Vec<PathElement>,
    parent_base: usize,
    unique_depth: usize,
    parent_zero_fraction: f64,
    parent_one_fraction: f64,
    parent_feature: Option<usize>,
    condition: Condition,
    condition_fraction: f64,
) {
    if condition_fraction == 0.0 {
        return;
    }

    // This call's path region sits just past the parent's.
    let base = parent_base + unique_depth + 1;
    if storage.len() < base + unique_depth + 2 {
        storage.resize(base + unique_depth + 2, PathElement::default());
    }
    storage.copy_within(parent_base..parent_base + unique_depth + 1, base);

    // The conditioned feature never enters the path.
    let skip_extend = condition != Condition::None && condition.feature() == parent_feature;
    if !skip_extend {
        extend_path(
            storage,
            base,
            unique_depth,
            parent_zero_fraction,
            parent_one_fraction,
            parent_feature,
        );
    }

    match node {
        TreeNode::Leaf { value, .. } => {
            for i in 1..=unique_depth {
                let w = unwound_path_sum(storage, base, unique_depth, i);
                let el = storage[base + i];
                let feature = el.feature_index.expect("non-root path elements carry a feature");
                phi[feature] +=
                    w * (el.one_fraction - el.zero_fraction) * *value * condition_fraction;
            }
        }
        TreeNode::Internal { feature_index, split, left, right, cover } => {
            let fi = *feature_index;
            let (hot, cold) = if split.goes_left(x[fi]) { (left, right) } else { (right, left) };
            let hot_zero_fraction = hot.cover() / *cover;
            let cold_zero_fraction = cold.cover() / *cover;
            let mut incoming_zero_fraction = 1.0;
            let mut incoming_one_fraction = 1.0;
            let mut unique_depth = unique_depth;

            // Undo an earlier split on this feature so it can be redone here.
            let mut path_index = 0;
            while path_index <= unique_depth {
                if storage[base + path_index].feature_index == Some(fi) {
                    break;
                }
                path_index += 1;
            }
            if path_index != unique_depth + 1 {
                incoming_zero_fraction = storage[base + path_index].zero_fraction;
                incoming_one_fraction = storage[base + path_index].one_fraction;
                unwind_path(storage, base, unique_depth, path_index);
                unique_depth -= 1;
            }

            let mut hot_condition_fraction = condition_fraction;
            let mut cold_condition_fraction = condition_fraction;
            let conditioned_here = condition.feature() == Some(fi);
            match condition {
                Condition::On(c) if c == fi => cold_condition_fraction = 0.0,
                Condition::Off(c) if c == fi => {
                    hot_condition_fraction *= hot_zero_fraction;
                    cold_condition_fraction *= cold_zero_fraction;
                }
                _ => {}
            }
            // A conditioned split adds no path element, so the child keeps
            // this depth instead of incrementing it.
            let child_depth = if conditioned_here { unique_depth } else { unique_depth + 1 };

            recurse(
                hot,
                x,
                phi,
                storage,
                base,
                child_depth,
                hot_zero_fraction * incoming_zero_fraction,
                incoming_one_fraction,
                Some(fi),
                condition,
                hot_condition_fraction,
            );
            recurse(
                cold,
                x,
                phi,
                storage,
                base,
                child_depth,
                cold_zero_fraction * incoming_zero_fraction,
                0.0,
                Some(fi),
                condition,
                cold_condition_fraction,
            );
        }
    }
}

fn extend_path(
    storage: &mut [PathElement],
    base: usize,
    unique_depth: usize,
    zero_fraction: f64,
    one_fraction: f64,
    feature_index: Option<usize>,
) {
    storage[base + unique_depth] = PathElement {
        feature_index,
        zero_fraction,
        one_fraction,
        pweight: if unique_depth == 0 { 1.0 } else { 0.0 },
    };
    for i in (0..unique_depth).rev() {
        storage[base + i + 1].pweight +=
            one_fraction * storage[base + i].pweight * (i + 1) as f64 / (unique_depth + 1) as f64;
        storage[base + i].pweight = zero_fraction * storage[base + i].pweight
            * (unique_depth - i) as f64
            / (unique_depth + 1) as f64;
    }
}

fn unwind_path(storage: &mut [PathElement], base: usize, unique_depth: usize, path_index: usize) {
    let one_fraction = storage[base + path_index].one_fraction;
    let zero_fraction = storage[base + path_index].zero_fraction;
    let mut next_one_portion = storage[base + unique_depth].pweight;

    for i in (0..unique_depth).rev() {
        if one_fraction != 0.0 {
            let tmp = storage[base + i].pweight;
            storage[base + i].pweight = next_one_portion * (unique_depth + 1) as f64
                / ((i + 1) as f64 * one_fraction);
            next_one_portion = tmp
                - storage[base + i].pweight * zero_fraction * (unique_depth - i) as f64
                    / (unique_depth + 1) as f64;
        } else {
            storage[base + i].pweight = storage[base + i].pweight * (unique_depth + 1) as f64
                / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    for i in path_index..unique_depth {
        storage[base + i].feature_index = storage[base + i + 1].feature_index;
        storage[base + i].zero_fraction = storage[base + i + 1].zero_fraction;
        storage[base + i].one_fraction = storage[base + i + 1].one_fraction;
    }
}

fn unwound_path_sum(
    storage: &[PathElement],
    base: usize,
    unique_depth: usize,
    path_index: usize,
) -> f64 {
    let one_fraction = storage[base + path_index].one_fraction;
    let zero_fraction = storage[base + path_index].zero_fraction;
    let mut next_one_portion = storage[base + unique_depth].pweight;
    let mut total = 0.0;

    if one_fraction != 0.0 {
        for i in (0..unique_depth).rev() {
            let tmp = next_one_portion / ((i + 1) as f64 * one_fraction);
            total += tmp;
            next_one_portion =
                storage[base + i].pweight - tmp * zero_fraction * (unique_depth - i) as f64;
        }
    } else {
        for i in (0..unique_depth).rev() {
            total += storage[base + i].pweight / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    total * (unique_depth + 1) as f64
}

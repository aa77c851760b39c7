//! Leaf-wise tree growth over gradient histograms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::data::{Dataset, Experiment};
use crate::gbdt::binning::{bin_dataset, BinnedData, FeatureBins};
use crate::gbdt::tree::{SplitRule, TreeNode};
use crate::gbdt::{sigmoid, Hyperparams, TrainError, TreeEnsemble};

/// Split gain of a candidate partition, given gradient/hessian sums.
pub fn split_gain(g_left: f64, h_left: f64, g_right: f64, h_right: f64, lambda: f64) -> f64 {
    let g = g_left + g_right;
    let h = h_left + h_right;
    0.5 * (g_left * g_left / (h_left + lambda)
        + g_right * g_right / (h_right + lambda)
        - g * g / (h + lambda))
}

/// Newton leaf value scaled by the learning rate.
pub fn leaf_value(g: f64, h: f64, lambda: f64, learning_rate: f64) -> f64 {
    -learning_rate * g / (h + lambda)
}

/// Train a boosted ensemble on one experiment's labels.
///
/// `base_score` is the logit of the weighted positive rate. The trainer is
/// fully deterministic: it uses no row or feature subsampling, so `seed` is
/// accepted for the contract but does not influence the fit.
pub fn train(
    ds: &Dataset,
    experiment: Experiment,
    hp: &Hyperparams,
    _seed: u64,
) -> Result<TreeEnsemble, TrainError> {
    hp.validate()?;
    let n = ds.len();
    let labels: Vec<f64> =
        ds.samples().iter().map(|s| if s.label(experiment) { 1.0 } else { 0.0 }).collect();
    let weights: Vec<f64> = ds.samples().iter().map(|s| s.weight).collect();

    let total_weight: f64 = weights.iter().sum();
    let positive_weight: f64 =
        labels.iter().zip(&weights).map(|(y, w)| y * w).sum();
    if positive_weight == 0.0 || positive_weight == total_weight {
        return Err(TrainError::SingleClass);
    }
    let positive_rate = positive_weight / total_weight;
    let base_score = (positive_rate / (1.0 - positive_rate)).ln();

    let binned = bin_dataset(ds, hp.max_bins);
    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0f64; n];
    let mut hess = vec![0.0f64; n];
    let mut trees = Vec::with_capacity(hp.num_trees);
    let mut grower = Grower::new(n);

    for _round in 0..hp.num_trees {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            grad[i] = weights[i] * (p - labels[i]);
            hess[i] = weights[i] * p * (1.0 - p);
        }
        let tree = grower.grow(&binned, &grad, &hess, &weights, hp, &mut margins);
        trees.push(tree);
    }

    Ok(TreeEnsemble {
        base_score,
        trees,
        schema: ds.schema().clone(),
        hyperparams: hp.clone(),
    })
}

#[derive(Clone, Copy, Default)]
struct BinStats {
    grad: f64,
    hess: f64,
    weight: f64,
    count: u64,
}

type Histogram = Vec<Vec<BinStats>>;

fn new_histogram(bins: &[FeatureBins]) -> Histogram {
    bins.iter().map(|b| vec![BinStats::default(); b.count()]).collect()
}

fn accumulate(
    hist: &mut Histogram,
    binned: &BinnedData,
    indices: &[u32],
    grad: &[f64],
    hess: &[f64],
    weights: &[f64],
) {
    for (feature, col) in binned.codes.iter().enumerate() {
        let h = &mut hist[feature];
        for &i in indices {
            let i = i as usize;
            let b = &mut h[col[i] as usize];
            b.grad += grad[i];
            b.hess += hess[i];
            b.weight += weights[i];
            b.count += 1;
        }
    }
}

/// parent - child, reusing the parent's buffers.
fn subtract(mut parent: Histogram, child: &Histogram) -> Histogram {
    for (pf, cf) in parent.iter_mut().zip(child) {
        for (pb, cb) in pf.iter_mut().zip(cf) {
            pb.grad -= cb.grad;
            pb.hess -= cb.hess;
            pb.weight -= cb.weight;
            pb.count -= cb.count;
        }
    }
    parent
}

/// Chosen split for one node.
struct SplitPlan {
    gain: f64,
    feature: usize,
    kind: SplitKind,
    left_grad: f64,
    left_hess: f64,
    left_weight: f64,
    left_count: u64,
}

enum SplitKind {
    /// Bins `<= bin` go left.
    NumericBin(u16),
    /// These codes go left (sorted).
    Categories(Vec<u32>),
}

struct NodeCtx {
    slot: usize,
    start: usize,
    end: usize,
    hist: Histogram,
    grad: f64,
    hess: f64,
    weight: f64,
    count: u64,
}

struct Candidate {
    gain: f64,
    slot: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.slot == other.slot
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: highest gain first; ties broken toward the older slot.
        self.gain
            .partial_cmp(&other.gain)
            .expect("gains are finite")
            .then_with(|| other.slot.cmp(&self.slot))
    }
}

enum Slot {
    Pending,
    Leaf { value: f64, cover: f64 },
    Internal { feature: usize, rule: SplitRule, left: usize, right: usize },
}

/// Reusable buffers for growing trees round after round.
struct Grower {
    partition: Vec<u32>,
    scratch: Vec<u32>,
}

impl Grower {
    fn new(n: usize) -> Self {
        Grower { partition: vec![0; n], scratch: vec![0; n] }
    }

    fn grow(
        &mut self,
        binned: &BinnedData,
        grad: &[f64],
        hess: &[f64],
        weights: &[f64],
        hp: &Hyperparams,
        margins: &mut [f64],
    ) -> TreeNode {
        let n = binned.n;
        for (i, p) in self.partition.iter_mut().enumerate() {
            *p = i as u32;
        }

        let mut slots: Vec<Slot> = vec![Slot::Pending];
        let mut contexts: Vec<Option<NodeCtx>> = vec![None];

        let mut root_hist = new_histogram(&binned.bins);
        accumulate(&mut root_hist, binned, &self.partition, grad, hess, weights);
        let root_grad: f64 = grad.iter().sum();
        let root_hess: f64 = hess.iter().sum();
        let root_weight: f64 = weights.iter().sum();
        let root = NodeCtx {
            slot: 0,
            start: 0,
            end: n,
            hist: root_hist,
            grad: root_grad,
            hess: root_hess,
            weight: root_weight,
            count: n as u64,
        };

        let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
        let mut plans: Vec<Option<SplitPlan>> = vec![None];
        if let Some(plan) = best_split(&root, binned, hp) {
            heap.push(Candidate { gain: plan.gain, slot: 0 });
            plans[0] = Some(plan);
        }
        contexts[0] = Some(root);

        let mut leaves = 1usize;
        while leaves < hp.max_leaves {
            let Some(cand) = heap.pop() else { break };
            let ctx = contexts[cand.slot].take().expect("candidate context present");
            let plan = plans[cand.slot].take().expect("candidate plan present");

            // Stable partition of the node's sample range.
            let (mid, rule) = self.apply_split(&plan, binned, ctx.start, ctx.end);

            let left_slot = slots.len();
            let right_slot = slots.len() + 1;
            slots.push(Slot::Pending);
            slots.push(Slot::Pending);
            contexts.push(None);
            contexts.push(None);
            plans.push(None);
            plans.push(None);
            slots[cand.slot] =
                Slot::Internal { feature: plan.feature, rule, left: left_slot, right: right_slot };

            let left_count = plan.left_count;
            let right_count = ctx.count - left_count;
            // Scan the smaller side; derive the other by subtraction.
            let scan_left = left_count <= right_count;
            let (scan_start, scan_end) =
                if scan_left { (ctx.start, mid) } else { (mid, ctx.end) };
            let mut scanned = new_histogram(&binned.bins);
            accumulate(&mut scanned, binned, &self.partition[scan_start..scan_end], grad, hess, weights);
            let other = subtract(ctx.hist, &scanned);
            let (left_hist, right_hist) =
                if scan_left { (scanned, other) } else { (other, scanned) };

            let left = NodeCtx {
                slot: left_slot,
                start: ctx.start,
                end: mid,
                hist: left_hist,
                grad: plan.left_grad,
                hess: plan.left_hess,
                weight: plan.left_weight,
                count: left_count,
            };
            let right = NodeCtx {
                slot: right_slot,
                start: mid,
                end: ctx.end,
                hist: right_hist,
                grad: ctx.grad - plan.left_grad,
                hess: ctx.hess - plan.left_hess,
                weight: ctx.weight - plan.left_weight,
                count: right_count,
            };

            for child in [left, right] {
                if let Some(plan) = best_split(&child, binned, hp) {
                    heap.push(Candidate { gain: plan.gain, slot: child.slot });
                    plans[child.slot] = Some(plan);
                }
                let slot = child.slot;
                contexts[slot] = Some(child);
            }
            leaves += 1;
        }

        // Finalize remaining contexts as leaves and update margins.
        for ctx in contexts.into_iter().flatten() {
            let value = leaf_value(ctx.grad, ctx.hess, hp.l2_lambda, hp.learning_rate);
            slots[ctx.slot] = Slot::Leaf { value, cover: ctx.weight };
            for &i in &self.partition[ctx.start..ctx.end] {
                margins[i as usize] += value;
            }
        }

        build_node(&slots, 0)
    }

    /// Stable in-place partition of `partition[start..end]`; returns the
    /// boundary index and the split rule in raw-value terms.
    fn apply_split(
        &mut self,
        plan: &SplitPlan,
        binned: &BinnedData,
        start: usize,
        end: usize,
    ) -> (usize, SplitRule) {
        let col = &binned.codes[plan.feature];
        let goes_left: Box<dyn Fn(u16) -> bool> = match &plan.kind {
            SplitKind::NumericBin(b) => {
                let b = *b;
                Box::new(move |code: u16| code <= b)
            }
            SplitKind::Categories(set) => {
                let set = set.clone();
                Box::new(move |code: u16| set.binary_search(&u32::from(code)).is_ok())
            }
        };

        let mut left_cursor = 0;
        let mut right_cursor = 0;
        let slice = &self.partition[start..end];
        let right_scratch = &mut self.scratch[..slice.len()];
        let mut left_buf = Vec::with_capacity(slice.len());
        for &i in slice {
            if goes_left(col[i as usize]) {
                left_buf.push(i);
                left_cursor += 1;
            } else {
                right_scratch[right_cursor] = i;
                right_cursor += 1;
            }
        }
        self.partition[start..start + left_cursor].copy_from_slice(&left_buf);
        self.partition[start + left_cursor..end].copy_from_slice(&right_scratch[..right_cursor]);

        let rule = match &plan.kind {
            SplitKind::NumericBin(b) => match &binned.bins[plan.feature] {
                FeatureBins::Numeric { cuts } => SplitRule::Threshold(cuts[*b as usize]),
                FeatureBins::Categorical { .. } => unreachable!("numeric bin on categorical"),
            },
            SplitKind::Categories(set) => SplitRule::Categories(set.clone()),
        };
        (start + left_cursor, rule)
    }
}

fn best_split(ctx: &NodeCtx, binned: &BinnedData, hp: &Hyperparams) -> Option<SplitPlan> {
    let min_leaf = hp.min_samples_leaf as u64;
    if ctx.count < 2 * min_leaf {
        return None;
    }
    let mut best: Option<SplitPlan> = None;
    for (feature, bins) in binned.bins.iter().enumerate() {
        let hist = &ctx.hist[feature];
        match bins {
            FeatureBins::Numeric { cuts } => {
                if cuts.is_empty() {
                    continue;
                }
                let mut cum = BinStats::default();
                for b in 0..hist.len() - 1 {
                    let s = &hist[b];
                    cum.grad += s.grad;
                    cum.hess += s.hess;
                    cum.weight += s.weight;
                    cum.count += s.count;
                    if cum.count < min_leaf {
                        continue;
                    }
                    if ctx.count - cum.count < min_leaf {
                        break;
                    }
                    consider(
                        &mut best,
                        ctx,
                        hp,
                        feature,
                        SplitKind::NumericBin(b as u16),
                        &cum,
                    );
                }
            }
            FeatureBins::Categorical { .. } => {
                // Categories ordered by their gradient statistic, then
                // scanned as an ordered sequence.
                let mut present: Vec<(u32, &BinStats)> = hist
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.count > 0)
                    .map(|(c, s)| (c as u32, s))
                    .collect();
                if present.len() < 2 {
                    continue;
                }
                present.sort_by(|a, b| {
                    let ra = a.1.grad / (a.1.hess + hp.l2_lambda);
                    let rb = b.1.grad / (b.1.hess + hp.l2_lambda);
                    ra.partial_cmp(&rb).expect("finite ratios").then(a.0.cmp(&b.0))
                });
                let mut cum = BinStats::default();
                let mut subset: Vec<u32> = Vec::new();
                for (code, s) in &present[..present.len() - 1] {
                    cum.grad += s.grad;
                    cum.hess += s.hess;
                    cum.weight += s.weight;
                    cum.count += s.count;
                    subset.push(*code);
                    if cum.count < min_leaf {
                        continue;
                    }
                    if ctx.count - cum.count < min_leaf {
                        break;
                    }
                    let mut sorted = subset.clone();
                    sorted.sort_unstable();
                    consider(&mut best, ctx, hp, feature, SplitKind::Categories(sorted), &cum);
                }
            }
        }
    }
    best
}

fn consider(
    best: &mut Option<SplitPlan>,
    ctx: &NodeCtx,
    hp: &Hyperparams,
    feature: usize,
    kind: SplitKind,
    left: &BinStats,
) {
    let gain = split_gain(
        left.grad,
        left.hess,
        ctx.grad - left.grad,
        ctx.hess - left.hess,
        hp.l2_lambda,
    );
    if gain <= 0.0 || !gain.is_finite() {
        return;
    }
    // Strict improvement keeps the first (lowest feature, lowest bin) winner
    // among exact ties, so the search order is the tie-break.
    if best.as_ref().map_or(true, |b| gain > b.gain) {
        *best = Some(SplitPlan {
            gain,
            feature,
            kind,
            left_grad: left.grad,
            left_hess: left.hess,
            left_weight: left.weight,
            left_count: left.count,
        });
    }
}

fn build_node(slots: &[Slot], slot: usize) -> TreeNode {
    match &slots[slot] {
        Slot::Leaf { value, cover } => TreeNode::Leaf { value: *value, cover: *cover },
        Slot::Internal { feature, rule, left, right, .. } => {
            let left = build_node(slots, *left);
            let right = build_node(slots, *right);
            // Internal covers are rebuilt as the sum of child covers so the
            // conservation invariant holds exactly at every node.
            let cover = left.cover() + right.cover();
            TreeNode::Internal {
                feature_index: *feature,
                split: rule.clone(),
                cover,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
        Slot::Pending => unreachable!("all slots finalized"),
    }
}

//! Histogram binning of the training matrix.
//!
//! Bin boundaries are computed once per training set. Numeric features get
//! quantile bins (exact per-value bins when the number of distinct values
//! fits in `max_bins`, which is the norm for the survey features);
//! categorical features use their codes directly.

use crate::data::Dataset;
use crate::schema::FeatureKind;

#[derive(Debug, Clone)]
pub enum FeatureBins {
    /// `cuts` are ascending upper boundaries: value v maps to the first bin
    /// b with `v <= cuts[b]`, or to the last bin. A split "after bin b"
    /// becomes the threshold `cuts[b]`.
    Numeric { cuts: Vec<f64> },
    /// Bin = category code.
    Categorical { categories: u32 },
}

impl FeatureBins {
    pub fn count(&self) -> usize {
        match self {
            FeatureBins::Numeric { cuts } => cuts.len() + 1,
            FeatureBins::Categorical { categories } => *categories as usize,
        }
    }

    pub fn bin_of(&self, value: f64) -> u16 {
        match self {
            FeatureBins::Numeric { cuts } => {
                // First cut >= value via partition_point on cut < value.
                let b = cuts.partition_point(|c| *c < value);
                b as u16
            }
            FeatureBins::Categorical { .. } => value as u16,
        }
    }
}

/// Column-major binned view of a dataset.
#[derive(Debug)]
pub struct BinnedData {
    pub bins: Vec<FeatureBins>,
    /// `codes[feature][sample]`.
    pub codes: Vec<Vec<u16>>,
    pub n: usize,
}

pub fn bin_dataset(ds: &Dataset, max_bins: usize) -> BinnedData {
    let n = ds.len();
    let m = ds.schema().len();
    let mut bins = Vec::with_capacity(m);
    let mut codes = Vec::with_capacity(m);
    for j in 0..m {
        let spec = ds.schema().feature(j);
        let fb = match spec.kind {
            FeatureKind::Categorical { categories } => FeatureBins::Categorical { categories },
            _ => {
                let mut values: Vec<f64> = ds.samples().iter().map(|s| s.features[j]).collect();
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                FeatureBins::Numeric { cuts: quantile_cuts(&values, max_bins) }
            }
        };
        let col: Vec<u16> = ds.samples().iter().map(|s| fb.bin_of(s.features[j])).collect();
        bins.push(fb);
        codes.push(col);
    }
    BinnedData { bins, codes, n }
}

/// Cut points between bins from a sorted value column.
fn quantile_cuts(sorted: &[f64], max_bins: usize) -> Vec<f64> {
    let mut distinct: Vec<f64> = Vec::new();
    for &v in sorted {
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
    }
    if distinct.len() <= 1 {
        return Vec::new();
    }
    if distinct.len() <= max_bins {
        return distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    // More distinct values than bins: cut at quantiles of the raw column.
    let mut cuts = Vec::with_capacity(max_bins - 1);
    for b in 1..max_bins {
        let idx = (b * sorted.len()) / max_bins;
        let lo = sorted[idx.saturating_sub(1)];
        let hi = sorted[idx.min(sorted.len() - 1)];
        let cut = 0.5 * (lo + hi);
        if cuts.last() != Some(&cut) && cut > *sorted.first().unwrap() {
            cuts.push(cut);
        }
    }
    cuts.dedup();
    cuts
}

//! Statistical products over attribution matrices: importance rankings,
//! cohort curves, dependence extracts, interaction heatmaps, group means,
//! Spearman matrices, and robustness comparisons.
//!
//! Everything here is an exact, deterministic function of its inputs; no
//! RNG is used in this module.

mod spearman;

pub use spearman::{average_ranks, spearman, spearman_matrix, SpearmanMatrix};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::schema::FeatureKind;
use crate::shap::{InteractionTensor, ShapMatrix};

/// z for the two-sided 99% normal confidence interval.
pub const Z_99: f64 = 2.5758;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("feature {0} not in schema")]
    UnknownFeature(String),
    #[error("attribution matrix rows ({matrix}) do not match dataset rows ({dataset})")]
    RowMismatch { matrix: usize, dataset: usize },
    #[error("cohort feature {0} must be integer-valued within its schema range")]
    NonIntegerCohort(String),
    #[error("group feature {0} must be categorical")]
    NotCategorical(String),
    #[error("need at least {want} {what}, got {got}")]
    TooFew { what: &'static str, want: usize, got: usize },
    #[error("curves share no cohort values")]
    EmptyCohortIntersection,
}

/// Features ordered by mean |phi|, descending; ties keep schema order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub entries: Vec<(String, f64)>,
}

pub fn global_importance(m: &ShapMatrix) -> ImportanceRanking {
    let means = m.mean_abs();
    let mut order: Vec<usize> = (0..means.len()).collect();
    // Stable sort keeps schema order among exact ties.
    order.sort_by(|&a, &b| means[b].partial_cmp(&means[a]).unwrap());
    ImportanceRanking {
        entries: order
            .into_iter()
            .map(|j| (m.feature_names[j].clone(), means[j]))
            .collect(),
    }
}

/// One cohort's aggregated attribution magnitude.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CohortPoint {
    pub cohort_value: i64,
    pub mean_abs: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Mean |phi| of one feature per discrete cohort value (ages), with a
/// normal-approximation confidence band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortCurve {
    pub feature: String,
    pub cohort_key: String,
    pub confidence: f64,
    pub points: Vec<CohortPoint>,
}

/// Normal z multiplier for the given two-sided confidence level.
fn z_for(confidence: f64) -> f64 {
    // Only 0.99 is used by the pipeline; nearby levels are provided for
    // completeness.
    if (confidence - 0.99).abs() < 1e-9 {
        Z_99
    } else if (confidence - 0.95).abs() < 1e-9 {
        1.9600
    } else if (confidence - 0.90).abs() < 1e-9 {
        1.6449
    } else {
        panic!("unsupported confidence level {confidence}; use 0.90, 0.95 or 0.99")
    }
}

/// Build the per-cohort mean |phi| curve for `feature`, grouped by the
/// integer-valued `cohort_feature` (age in the replication pipeline).
/// Cohort values with no samples are omitted.
pub fn cohort_curve(
    m: &ShapMatrix,
    ds: &Dataset,
    feature: &str,
    cohort_feature: &str,
    confidence: f64,
) -> Result<CohortCurve, AnalysisError> {
    check_rows(m, ds)?;
    let fj = feature_index(ds, feature)?;
    let cj = feature_index(ds, cohort_feature)?;
    for s in ds.samples() {
        if s.features[cj].fract() != 0.0 {
            return Err(AnalysisError::NonIntegerCohort(cohort_feature.to_string()));
        }
    }
    let z = z_for(confidence);

    let mut groups: std::collections::BTreeMap<i64, Vec<f64>> = std::collections::BTreeMap::new();
    for (i, s) in ds.samples().iter().enumerate() {
        groups
            .entry(s.features[cj] as i64)
            .or_default()
            .push(m.value(i, fj).abs());
    }

    let points = groups
        .into_iter()
        .map(|(cohort_value, values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            let half = z * std / (n as f64).sqrt();
            CohortPoint { cohort_value, mean_abs: mean, ci_low: mean - half, ci_high: mean + half, n }
        })
        .collect();

    Ok(CohortCurve {
        feature: feature.to_string(),
        cohort_key: cohort_feature.to_string(),
        confidence,
        points,
    })
}

/// Per-sample rows preserving vertical dispersion: feature value, phi, and
/// a colouring feature's value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DependenceExtract {
    pub feature: String,
    pub color_feature: String,
    /// The attribution column plotted: phi or an interaction pair.
    pub value_kind: String,
    pub rows: Vec<DependenceRow>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DependenceRow {
    pub sample_id: u64,
    pub feature_value: f64,
    pub value: f64,
    pub color_value: f64,
}

/// One row per sample: (x = feature value, y = phi_feature, color).
pub fn dependence_extract(
    m: &ShapMatrix,
    ds: &Dataset,
    feature: &str,
    color_feature: &str,
) -> Result<DependenceExtract, AnalysisError> {
    check_rows(m, ds)?;
    let fj = feature_index(ds, feature)?;
    let cj = feature_index(ds, color_feature)?;
    let rows = ds
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| DependenceRow {
            sample_id: s.id,
            feature_value: s.features[fj],
            value: m.value(i, fj),
            color_value: s.features[cj],
        })
        .collect();
    Ok(DependenceExtract {
        feature: feature.to_string(),
        color_feature: color_feature.to_string(),
        value_kind: "shap".to_string(),
        rows,
    })
}

/// Which feature of an interaction pair goes on the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairAxis {
    A,
    B,
}

/// One row per sample for the pair (a, b): (x = chosen axis feature value,
/// y = Phi_ab, color = the other feature's value). Phi_ab is reported once
/// per sample; swapping the axis only changes which column lands on x.
pub fn interaction_pair_extract(
    t: &InteractionTensor,
    ds: &Dataset,
    feature_a: &str,
    feature_b: &str,
    x_axis: PairAxis,
) -> Result<DependenceExtract, AnalysisError> {
    if t.n_samples() != ds.len() {
        return Err(AnalysisError::RowMismatch { matrix: t.n_samples(), dataset: ds.len() });
    }
    let ja = feature_index(ds, feature_a)?;
    let jb = feature_index(ds, feature_b)?;
    if ja == jb {
        return Err(AnalysisError::UnknownFeature(format!(
            "interaction pair needs two distinct features, got {feature_a} twice"
        )));
    }
    let (xj, cjj) = match x_axis {
        PairAxis::A => (ja, jb),
        PairAxis::B => (jb, ja),
    };
    let rows = ds
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| DependenceRow {
            sample_id: s.id,
            feature_value: s.features[xj],
            value: t.value(i, ja, jb),
            color_value: s.features[cjj],
        })
        .collect();
    Ok(DependenceExtract {
        feature: ds.schema().feature(xj).name.clone(),
        color_feature: ds.schema().feature(cjj).name.clone(),
        value_kind: format!("interaction:{feature_a}*{feature_b}"),
        rows,
    })
}

/// Mean |interaction| per feature pair; symmetric and non-negative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatmapMatrix {
    pub feature_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

pub fn interaction_heatmap(t: &InteractionTensor) -> HeatmapMatrix {
    HeatmapMatrix { feature_names: t.feature_names.clone(), values: t.mean_abs_matrix() }
}

/// Mean |phi_feature| per category of a categorical grouping feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupImportance {
    pub feature: String,
    pub group_feature: String,
    pub rows: Vec<GroupImportanceRow>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroupImportanceRow {
    pub group: u32,
    pub mean_abs: f64,
    pub n: usize,
}

pub fn group_mean_importance(
    m: &ShapMatrix,
    ds: &Dataset,
    feature: &str,
    group_feature: &str,
) -> Result<GroupImportance, AnalysisError> {
    check_rows(m, ds)?;
    let fj = feature_index(ds, feature)?;
    let gj = feature_index(ds, group_feature)?;
    let categories = match ds.schema().feature(gj).kind {
        FeatureKind::Categorical { categories } => categories,
        _ => return Err(AnalysisError::NotCategorical(group_feature.to_string())),
    };
    let mut sums = vec![0.0f64; categories as usize];
    let mut counts = vec![0usize; categories as usize];
    for (i, s) in ds.samples().iter().enumerate() {
        let g = s.features[gj] as usize;
        sums[g] += m.value(i, fj).abs();
        counts[g] += 1;
    }
    let rows = (0..categories as usize)
        .filter(|&g| counts[g] > 0)
        .map(|g| GroupImportanceRow {
            group: g as u32,
            mean_abs: sums[g] / counts[g] as f64,
            n: counts[g],
        })
        .collect();
    Ok(GroupImportance {
        feature: feature.to_string(),
        group_feature: group_feature.to_string(),
        rows,
    })
}

/// Pairwise similarity between cohort curves over their shared cohort grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSimilarity {
    pub curve_a: usize,
    pub curve_b: usize,
    /// Spearman correlation of the aligned mean-|phi| sequences.
    pub spearman: f64,
    /// Largest absolute pointwise gap between the aligned means.
    pub max_gap: f64,
}

/// Compare cohort curves pairwise: Spearman of the mean sequences plus the
/// maximum absolute pointwise gap, aligned on the intersection of cohort
/// values.
pub fn robustness_compare(curves: &[CohortCurve]) -> Result<Vec<CurveSimilarity>, AnalysisError> {
    if curves.len() < 2 {
        return Err(AnalysisError::TooFew { what: "curves", want: 2, got: curves.len() });
    }
    let mut shared: Vec<i64> = curves[0].points.iter().map(|p| p.cohort_value).collect();
    for curve in &curves[1..] {
        let values: std::collections::BTreeSet<i64> =
            curve.points.iter().map(|p| p.cohort_value).collect();
        shared.retain(|v| values.contains(v));
    }
    if shared.is_empty() {
        return Err(AnalysisError::EmptyCohortIntersection);
    }

    let aligned: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| {
            shared
                .iter()
                .map(|v| {
                    c.points
                        .iter()
                        .find(|p| p.cohort_value == *v)
                        .expect("value in intersection")
                        .mean_abs
                })
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    for a in 0..aligned.len() {
        for b in (a + 1)..aligned.len() {
            let max_gap = aligned[a]
                .iter()
                .zip(&aligned[b])
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            out.push(CurveSimilarity {
                curve_a: a,
                curve_b: b,
                spearman: spearman(&aligned[a], &aligned[b]),
                max_gap,
            });
        }
    }
    Ok(out)
}

fn feature_index(ds: &Dataset, name: &str) -> Result<usize, AnalysisError> {
    ds.schema().index_of(name).ok_or_else(|| AnalysisError::UnknownFeature(name.to_string()))
}

fn check_rows(m: &ShapMatrix, ds: &Dataset) -> Result<(), AnalysisError> {
    if m.n_samples() != ds.len() {
        return Err(AnalysisError::RowMismatch { matrix: m.n_samples(), dataset: ds.len() });
    }
    Ok(())
}

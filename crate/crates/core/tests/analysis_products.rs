//! Aggregation products over hand-built attribution matrices.

use shapboost::analysis::{
    cohort_curve, dependence_extract, global_importance, group_mean_importance,
    interaction_heatmap, interaction_pair_extract, robustness_compare, spearman_matrix,
    AnalysisError, PairAxis,
};
use shapboost::data::{Dataset, Provenance, Sample};
use shapboost::shap::{InteractionTensor, ShapMatrix};
use shapboost::{FeatureSchema, FeatureSpec, Occupation};

fn schema() -> FeatureSchema {
    FeatureSchema::new(vec![
        FeatureSpec::binary("flag"),
        FeatureSpec::numeric("age", 21.0, 49.0),
        FeatureSpec::categorical("state", 4),
    ])
    .unwrap()
}

fn dataset(rows: &[(f64, f64, f64)]) -> Dataset {
    let samples = rows
        .iter()
        .enumerate()
        .map(|(i, &(flag, age, state))| Sample {
            id: i as u64,
            features: vec![flag, age, state],
            weight: 1.0,
            occupation: Occupation::Blue,
        })
        .collect();
    Dataset::new(schema(), samples, Provenance::Synthetic).unwrap()
}

fn matrix(ds: &Dataset, phi_rows: Vec<[f64; 3]>) -> ShapMatrix {
    ShapMatrix::new(
        0.0,
        ds.schema().names(),
        ds.samples().iter().map(|s| s.id).collect(),
        phi_rows.into_iter().flatten().collect(),
    )
}

#[test]
fn cohort_curve_example_values() {
    // Four samples, ages 30 and 40, |phi| = {1, 1, 3, 3} within age 30:
    // mean 2, sample std 1.1547, 99% CI approximately [0.513, 3.487].
    let ds = dataset(&[
        (1.0, 30.0, 0.0),
        (1.0, 30.0, 0.0),
        (0.0, 30.0, 0.0),
        (0.0, 30.0, 0.0),
        (1.0, 40.0, 1.0),
    ]);
    let m = matrix(
        &ds,
        vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [3.0, 0.0, 0.0],
            [-3.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
        ],
    );
    let curve = cohort_curve(&m, &ds, "flag", "age", 0.99).unwrap();
    assert_eq!(curve.points.len(), 2);
    let p30 = &curve.points[0];
    assert_eq!(p30.cohort_value, 30);
    assert_eq!(p30.n, 4);
    assert!((p30.mean_abs - 2.0).abs() < 1e-12);
    assert!((p30.ci_low - 0.513).abs() < 1e-3, "ci_low {}", p30.ci_low);
    assert!((p30.ci_high - 3.487).abs() < 1e-3, "ci_high {}", p30.ci_high);
    // Single-member cohort: zero-width interval.
    let p40 = &curve.points[1];
    assert_eq!((p40.ci_low, p40.ci_high), (p40.mean_abs, p40.mean_abs));
}

#[test]
fn cohort_curve_flat_when_magnitudes_constant() {
    let ds = dataset(&[(1.0, 25.0, 0.0), (0.0, 25.0, 1.0), (1.0, 40.0, 2.0), (0.0, 40.0, 3.0)]);
    let m = matrix(
        &ds,
        vec![[0.7, 0.0, 0.0], [-0.7, 0.0, 0.0], [0.7, 0.0, 0.0], [-0.7, 0.0, 0.0]],
    );
    let curve = cohort_curve(&m, &ds, "flag", "age", 0.99).unwrap();
    for p in &curve.points {
        assert!((p.mean_abs - 0.7).abs() < 1e-12);
        assert_eq!(p.ci_low, p.mean_abs);
        assert_eq!(p.ci_high, p.mean_abs);
    }
}

#[test]
fn cohort_curve_is_order_invariant() {
    let rows = [(1.0, 30.0, 0.0), (0.0, 35.0, 1.0), (1.0, 30.0, 2.0), (0.0, 42.0, 3.0)];
    let phis = [[0.5, 0.0, 0.0], [1.5, 0.0, 0.0], [2.5, 0.0, 0.0], [3.5, 0.0, 0.0]];
    let ds = dataset(&rows);
    let m = matrix(&ds, phis.to_vec());
    let curve = cohort_curve(&m, &ds, "flag", "age", 0.99).unwrap();

    let perm = [2usize, 0, 3, 1];
    let rows_p: Vec<(f64, f64, f64)> = perm.iter().map(|&i| rows[i]).collect();
    let phis_p: Vec<[f64; 3]> = perm.iter().map(|&i| phis[i]).collect();
    let ds_p = dataset(&rows_p);
    let m_p = matrix(&ds_p, phis_p);
    let curve_p = cohort_curve(&m_p, &ds_p, "flag", "age", 0.99).unwrap();

    for (a, b) in curve.points.iter().zip(&curve_p.points) {
        assert_eq!(a.cohort_value, b.cohort_value);
        assert_eq!(a.n, b.n);
        assert!((a.mean_abs - b.mean_abs).abs() < 1e-12);
    }
}

#[test]
fn non_integer_cohort_feature_rejected() {
    let samples = vec![Sample {
        id: 0,
        features: vec![1.0, 30.5, 0.0],
        weight: 1.0,
        occupation: Occupation::Blue,
    }];
    let ds = Dataset::new(schema(), samples, Provenance::Synthetic).unwrap();
    let m = matrix(&ds, vec![[1.0, 0.0, 0.0]]);
    assert!(matches!(
        cohort_curve(&m, &ds, "flag", "age", 0.99),
        Err(AnalysisError::NonIntegerCohort(_))
    ));
}

#[test]
fn importance_ranking_and_tie_order() {
    let ds = dataset(&[(1.0, 30.0, 0.0), (0.0, 40.0, 1.0)]);
    // Feature "flag" has |phi| = 2 everywhere; others zero.
    let m = matrix(&ds, vec![[2.0, 0.0, 0.0], [-2.0, 0.0, 0.0]]);
    let ranking = global_importance(&m);
    assert_eq!(ranking.entries[0], ("flag".to_string(), 2.0));
    // Ties (age and state both 0) keep schema order.
    assert_eq!(ranking.entries[1].0, "age");
    assert_eq!(ranking.entries[2].0, "state");

    // Scaling every phi by c > 0 preserves the ordering.
    let scaled = matrix(&ds, vec![[6.0, 0.0, 0.0], [-6.0, 0.0, 0.0]]);
    let ranking_scaled = global_importance(&scaled);
    let names: Vec<&String> = ranking.entries.iter().map(|(n, _)| n).collect();
    let names_scaled: Vec<&String> = ranking_scaled.entries.iter().map(|(n, _)| n).collect();
    assert_eq!(names, names_scaled);
    assert!((ranking_scaled.entries[0].1 - 3.0 * ranking.entries[0].1).abs() < 1e-12);
}

#[test]
fn dependence_extract_preserves_rows() {
    let ds = dataset(&[(1.0, 30.0, 0.0), (0.0, 40.0, 1.0), (1.0, 45.0, 2.0)]);
    let m = matrix(&ds, vec![[0.5, 0.0, 0.0], [-0.5, 0.0, 0.0], [0.0, 0.0, 0.0]]);
    let ext = dependence_extract(&m, &ds, "flag", "age").unwrap();
    assert_eq!(ext.rows.len(), 3);
    assert_eq!(ext.rows[1].feature_value, 0.0);
    assert_eq!(ext.rows[1].value, -0.5);
    assert_eq!(ext.rows[1].color_value, 40.0);

    // feature == color: identical columns.
    let same = dependence_extract(&m, &ds, "age", "age").unwrap();
    for r in &same.rows {
        assert_eq!(r.feature_value, r.color_value);
    }

    // Constant model: all-zero attribution rows pass through unchanged.
    let zero = matrix(&ds, vec![[0.0; 3]; 3]);
    let ext = dependence_extract(&zero, &ds, "flag", "age").unwrap();
    assert!(ext.rows.iter().all(|r| r.value == 0.0));
}

fn tensor(ds: &Dataset, per_sample: Vec<[[f64; 3]; 3]>) -> InteractionTensor {
    InteractionTensor::new(
        0.0,
        ds.schema().names(),
        ds.samples().iter().map(|s| s.id).collect(),
        per_sample.into_iter().flat_map(|m| m.into_iter().flatten()).collect(),
    )
}

#[test]
fn pair_extract_axis_swap_keeps_values() {
    let ds = dataset(&[(1.0, 30.0, 0.0), (0.0, 40.0, 1.0)]);
    let t = tensor(
        &ds,
        vec![
            [[0.1, 0.3, 0.0], [0.3, 0.2, 0.0], [0.0, 0.0, 0.0]],
            [[0.4, -0.6, 0.0], [-0.6, 0.5, 0.0], [0.0, 0.0, 0.0]],
        ],
    );
    let by_a = interaction_pair_extract(&t, &ds, "flag", "age", PairAxis::A).unwrap();
    let by_b = interaction_pair_extract(&t, &ds, "flag", "age", PairAxis::B).unwrap();
    assert_eq!(by_a.rows[0].value, 0.3);
    assert_eq!(by_b.rows[0].value, 0.3);
    assert_eq!(by_a.rows[1].value, -0.6);
    assert_eq!(by_b.rows[1].value, -0.6);
    // Only the x column changes.
    assert_eq!(by_a.rows[0].feature_value, 1.0);
    assert_eq!(by_b.rows[0].feature_value, 30.0);
    assert_eq!(by_a.rows[0].color_value, 30.0);
    assert_eq!(by_b.rows[0].color_value, 1.0);
}

#[test]
fn heatmap_is_symmetric_and_finds_planted_pair() {
    let ds = dataset(&[(1.0, 30.0, 0.0), (0.0, 40.0, 1.0)]);
    let t = tensor(
        &ds,
        vec![
            [[0.5, 0.9, 0.1], [0.9, 0.2, 0.0], [0.1, 0.0, 0.3]],
            [[0.5, -1.1, 0.1], [-1.1, 0.2, 0.0], [0.1, 0.0, 0.3]],
        ],
    );
    let heat = interaction_heatmap(&t);
    let m = heat.values;
    for j in 0..3 {
        for k in 0..3 {
            assert_eq!(m[j][k], m[k][j]);
            assert!(m[j][k] >= 0.0);
        }
    }
    // The planted (flag, age) pair dominates off-diagonals.
    assert!((m[0][1] - 1.0).abs() < 1e-12);
    let mut best = (0, 0);
    let mut best_v = f64::NEG_INFINITY;
    for j in 0..3 {
        for k in 0..3 {
            if j != k && m[j][k] > best_v {
                best_v = m[j][k];
                best = (j, k);
            }
        }
    }
    assert!(best == (0, 1) || best == (1, 0));
}

#[test]
fn group_means_per_state() {
    let ds = dataset(&[(1.0, 30.0, 0.0), (0.0, 40.0, 0.0), (1.0, 45.0, 2.0)]);
    let m = matrix(&ds, vec![[1.0, 0.0, 0.0], [-3.0, 0.0, 0.0], [5.0, 0.0, 0.0]]);
    let g = group_mean_importance(&m, &ds, "flag", "state").unwrap();
    assert_eq!(g.rows.len(), 2); // states 1 and 3 are empty and omitted
    assert_eq!(g.rows[0].group, 0);
    assert_eq!(g.rows[0].n, 2);
    assert!((g.rows[0].mean_abs - 2.0).abs() < 1e-12);
    assert_eq!(g.rows[1].group, 2);
    assert!((g.rows[1].mean_abs - 5.0).abs() < 1e-12);

    // Non-categorical group feature is an error.
    assert!(matches!(
        group_mean_importance(&m, &ds, "flag", "age"),
        Err(AnalysisError::NotCategorical(_))
    ));

    // Constant |phi| reports the same mean in every state.
    let c = matrix(&ds, vec![[2.0, 0.0, 0.0], [-2.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
    let g = group_mean_importance(&c, &ds, "flag", "state").unwrap();
    assert!(g.rows.iter().all(|r| (r.mean_abs - 2.0).abs() < 1e-12));
}

#[test]
fn robustness_similarity_on_shifted_curves() {
    let ds = dataset(&[
        (1.0, 25.0, 0.0),
        (1.0, 30.0, 0.0),
        (1.0, 35.0, 0.0),
        (1.0, 40.0, 0.0),
    ]);
    let m = matrix(
        &ds,
        vec![[0.1, 0.0, 0.0], [0.2, 0.0, 0.0], [0.3, 0.0, 0.0], [0.4, 0.0, 0.0]],
    );
    let base = cohort_curve(&m, &ds, "flag", "age", 0.99).unwrap();
    let mut shifted = base.clone();
    for p in &mut shifted.points {
        p.mean_abs += 0.05;
        p.ci_low += 0.05;
        p.ci_high += 0.05;
    }
    // Identical curves: similarity 1, gap 0.
    let sims = robustness_compare(&[base.clone(), base.clone()]).unwrap();
    assert_eq!(sims[0].spearman, 1.0);
    assert_eq!(sims[0].max_gap, 0.0);
    // Vertical shift: rank correlation stays 1, gap equals the shift.
    let sims = robustness_compare(&[base.clone(), shifted]).unwrap();
    assert_eq!(sims[0].spearman, 1.0);
    assert!((sims[0].max_gap - 0.05).abs() < 1e-12);
    // A single curve is an error.
    assert!(robustness_compare(&[base]).is_err());
}

#[test]
fn spearman_matrix_diagonal_and_constants() {
    let ds = dataset(&[(1.0, 30.0, 0.0), (1.0, 35.0, 1.0), (1.0, 40.0, 2.0)]);
    let sm = spearman_matrix(&ds);
    for j in 0..3 {
        assert_eq!(sm.values[j][j], 1.0);
    }
    // "flag" is constant: flagged, all cross-correlations 0.
    assert!(sm.constant_columns[0]);
    assert_eq!(sm.values[0][1], 0.0);
    assert_eq!(sm.values[0][2], 0.0);
    // age and state increase together here.
    assert!((sm.values[1][2] - 1.0).abs() < 1e-12);
    assert_eq!(sm.values[1][2], sm.values[2][1]);
}

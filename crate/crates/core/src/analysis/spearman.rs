//! Spearman rank correlation with average-rank tie handling.

use crate::data::Dataset;

/// Average (fractional) ranks, 1-based; ties share their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the mean of ranks i+1..=j+1.
        let mean_rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of the average-ranked columns. A constant column
/// yields 0 by convention.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    pearson(&ra, &rb)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - mean_a) * (y - mean_b);
        da += (x - mean_a) * (x - mean_a);
        db += (y - mean_b) * (y - mean_b);
    }
    if da == 0.0 || db == 0.0 {
        return 0.0;
    }
    num / (da * db).sqrt()
}

/// Feature-by-feature Spearman correlation matrix of the dataset columns.
#[derive(Debug, Clone)]
pub struct SpearmanMatrix {
    pub feature_names: Vec<String>,
    /// Symmetric, diagonal 1.
    pub values: Vec<Vec<f64>>,
    /// Flags constant columns whose correlations were forced to 0.
    pub constant_columns: Vec<bool>,
}

pub fn spearman_matrix(ds: &Dataset) -> SpearmanMatrix {
    let m = ds.schema().len();
    let columns: Vec<Vec<f64>> = (0..m)
        .map(|j| ds.samples().iter().map(|s| s.features[j]).collect())
        .collect();
    let ranked: Vec<Vec<f64>> = columns.iter().map(|c| average_ranks(c)).collect();
    let constant_columns: Vec<bool> =
        columns.iter().map(|c| c.iter().all(|&v| v == c[0])).collect();

    let mut values = vec![vec![0.0; m]; m];
    for j in 0..m {
        values[j][j] = 1.0;
        for k in (j + 1)..m {
            let rho = if constant_columns[j] || constant_columns[k] {
                0.0
            } else {
                pearson(&ranked[j], &ranked[k])
            };
            values[j][k] = rho;
            values[k][j] = rho;
        }
    }
    SpearmanMatrix { feature_names: ds.schema().names(), values, constant_columns }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn self_correlation_is_one() {
        let x = [3.0, 1.0, 4.0, 1.5, 9.0];
        assert_eq!(spearman(&x, &x), 1.0);
    }

    #[test]
    fn reversal_is_minus_one() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(spearman(&x, &y), -1.0);
    }

    #[test]
    fn tie_free_shortcut_formula_agrees() {
        // x = (1..5), y = (2,1,4,3,5): d^2 sums to 4, so the tie-free
        // shortcut gives rho = 1 - 6*4/(5*24) = 0.8; the rank-Pearson
        // route must agree.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 1.0, 4.0, 3.0, 5.0];
        let rho = spearman(&x, &y);
        assert_abs_diff_eq!(rho, 0.8, epsilon = 1e-12);

        let d2: f64 = average_ranks(&x)
            .iter()
            .zip(average_ranks(&y))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let n = x.len() as f64;
        let shortcut = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
        assert_abs_diff_eq!(rho, shortcut, epsilon = 1e-12);
    }

    #[test]
    fn ties_get_average_ranks() {
        let ranks = average_ranks(&[1.0, 1.0, 2.0]);
        assert_eq!(ranks, vec![1.5, 1.5, 3.0]);
        // Hand-computed rank-Pearson for x=(1,1,2), y=(1,2,3):
        // ranks x = (1.5, 1.5, 3), y = (1, 2, 3); rho = 1.5/sqrt(1.5*2).
        let rho = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(rho, 1.5 / (3.0f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn constant_column_gives_zero() {
        let rho = spearman(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]);
        assert_eq!(rho, 0.0);
    }

    #[test]
    fn monotone_transform_invariance() {
        let x = [3.0, 7.0, 1.0, 9.0, 5.0, 2.0];
        let y = [1.0, 0.0, 4.0, 2.0, 8.0, 3.0];
        let before = spearman(&x, &y);
        let tx: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let ty: Vec<f64> = y.iter().map(|v| v * v * v).collect();
        let after = spearman(&tx, &ty);
        assert_eq!(before, after);
    }
}

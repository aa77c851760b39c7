//! Exponential-time Shapley oracles used to verify the fast path.
//!
//! Both enumerate every feature subset once, tabulating the conditional
//! expectation v(S), then apply the classical weighted-difference formulas.

use thiserror::Error;

use crate::gbdt::TreeEnsemble;
use crate::shap::expectation::expectation_masked;

/// Enumeration cap for Shapley values (2^M subsets).
pub const BRUTE_FORCE_FEATURE_CAP: usize = 15;
/// Enumeration cap for interaction values.
pub const BRUTE_FORCE_INTERACTION_CAP: usize = 12;

#[derive(Debug, Error)]
pub enum BruteForceError {
    #[error("{features} features exceed the brute-force cap of {cap}")]
    TooManyFeatures { features: usize, cap: usize },
}

/// Shapley values by direct subset enumeration.
///
/// `phi[j] = sum over S not containing j of
/// |S|! (M-|S|-1)! / M! * (v(S + j) - v(S))`, with v the path-dependent
/// conditional expectation and `base = v(empty)`.
pub fn shap_brute_force(
    model: &TreeEnsemble,
    x: &[f64],
) -> Result<(f64, Vec<f64>), BruteForceError> {
    let m = model.schema.len();
    if m > BRUTE_FORCE_FEATURE_CAP {
        return Err(BruteForceError::TooManyFeatures { features: m, cap: BRUTE_FORCE_FEATURE_CAP });
    }
    let v = tabulate(model, x, m);
    let fact = factorials(m);
    let m_fact = fact[m];

    let mut phi = vec![0.0f64; m];
    for (j, phi_j) in phi.iter_mut().enumerate() {
        let bit = 1u64 << j;
        for s in 0..(1u64 << m) {
            if s & bit != 0 {
                continue;
            }
            let size = s.count_ones() as usize;
            let weight = fact[size] * fact[m - size - 1] / m_fact;
            *phi_j += weight * (v[(s | bit) as usize] - v[s as usize]);
        }
    }
    Ok((v[0], phi))
}

/// Pairwise Shapley interaction values by direct subset enumeration.
///
/// Off-diagonal: `Phi[j][k] = sum over S excluding j,k of
/// |S|! (M-|S|-2)! / (2 (M-1)!) * [v(S+jk) - v(S+j) - v(S+k) + v(S)]`.
/// Diagonal: `Phi[j][j] = phi[j] - sum of the off-diagonal row`.
pub fn interaction_brute_force(
    model: &TreeEnsemble,
    x: &[f64],
) -> Result<(f64, Vec<Vec<f64>>), BruteForceError> {
    let m = model.schema.len();
    if m > BRUTE_FORCE_INTERACTION_CAP {
        return Err(BruteForceError::TooManyFeatures {
            features: m,
            cap: BRUTE_FORCE_INTERACTION_CAP,
        });
    }
    let (base, phi) = shap_brute_force(model, x)?;
    let v = tabulate(model, x, m);
    let fact = factorials(m);

    let mut values = vec![vec![0.0f64; m]; m];
    if m >= 2 {
        let m1_fact = fact[m - 1];
        for j in 0..m {
            for k in (j + 1)..m {
                let bj = 1u64 << j;
                let bk = 1u64 << k;
                let mut phi_jk = 0.0;
                for s in 0..(1u64 << m) {
                    if s & (bj | bk) != 0 {
                        continue;
                    }
                    let size = s.count_ones() as usize;
                    let weight = fact[size] * fact[m - size - 2] / (2.0 * m1_fact);
                    let delta = v[(s | bj | bk) as usize] - v[(s | bj) as usize]
                        - v[(s | bk) as usize]
                        + v[s as usize];
                    phi_jk += weight * delta;
                }
                values[j][k] = phi_jk;
                values[k][j] = phi_jk;
            }
        }
    }
    for j in 0..m {
        let off: f64 = (0..m).filter(|&k| k != j).map(|k| values[j][k]).sum();
        values[j][j] = phi[j] - off;
    }
    Ok((base, values))
}

/// v(S) for every subset mask.
fn tabulate(model: &TreeEnsemble, x: &[f64], m: usize) -> Vec<f64> {
    (0..(1u64 << m)).map(|mask| expectation_masked(model, x, mask)).collect()
}

fn factorials(m: usize) -> Vec<f64> {
    let mut fact = vec![1.0f64; m + 1];
    for i in 1..=m {
        fact[i] = fact[i - 1] * i as f64;
    }
    fact
}

//! Clustering accuracy: the fraction of points correctly assigned under the
//! best one-to-one matching between predicted clusters and true classes.

use crate::data::LabelVector;
use crate::error::{Error, Result};

/// Computes ACC by building the confusion matrix and solving the assignment
/// problem on its negation with the Hungarian algorithm; greedy matching
/// would underestimate on unbalanced confusion matrices.
pub fn accuracy(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let n = pred.len();
    let confusion = confusion_matrix(pred, truth);
    let matched = best_match_count(&confusion);
    Ok(matched as f64 / n as f64)
}

/// Confusion counts indexed `[predicted cluster][true class]`, padded to a
/// square so the assignment is always one-to-one.
pub(crate) fn confusion_matrix(pred: &LabelVector, truth: &LabelVector) -> Vec<Vec<u64>> {
    let side = pred.n_classes().max(truth.n_classes());
    let mut confusion = vec![vec![0u64; side]; side];
    for i in 0..pred.len() {
        confusion[pred.get(i)][truth.get(i)] += 1;
    }
    confusion
}

/// Maximum total count over all one-to-one cluster-to-class assignments.
pub(crate) fn best_match_count(confusion: &[Vec<u64>]) -> u64 {
    let max_entry = confusion
        .iter()
        .flat_map(|r| r.iter())
        .copied()
        .max()
        .unwrap_or(0) as i64;
    // maximize counts == minimize (max - count)
    let cost: Vec<Vec<i64>> = confusion
        .iter()
        .map(|row| row.iter().map(|&c| max_entry - c as i64).collect())
        .collect();
    let assignment = hungarian_min_cost(&cost);
    assignment
        .iter()
        .enumerate()
        .map(|(row, &col)| confusion[row][col])
        .sum()
}

/// Hungarian algorithm (potentials formulation) for the square min-cost
/// assignment problem. Returns the column matched to each row.
fn hungarian_min_cost(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;

    // 1-based potentials over rows (u) and columns (v); way[j] remembers the
    // previous column on the augmenting path to j
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut match_col = vec![0usize; n + 1]; // row matched to each column
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        match_col[0] = row;
        let mut j0 = 0usize;
        let mut min_v = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = match_col[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if match_col[j0] == 0 {
                break;
            }
        }
        // unwind the augmenting path
        while j0 != 0 {
            let j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if match_col[j] > 0 {
            row_to_col[match_col[j] - 1] = j - 1;
        }
    }
    row_to_col
}

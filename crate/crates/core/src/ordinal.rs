//! Ordinal (rank-based) distances.
//!
//! The ordinal rank of sample `j` with respect to sample `i` is the number
//! of samples strictly closer to `i` than `j` is, counting over all indices
//! including `i` itself. Replacing absolute distances with these ranks makes
//! every downstream step invariant under strictly monotone transforms of the
//! input metric, which is what lets the pipeline survive the loss of
//! distance contrast in high dimension.

use rayon::prelude::*;

use crate::distance::DistanceMatrix;
use crate::matrix::IntMat;

/// Symmetrized integer rank matrix: entry `(i, j)` is the larger of the two
/// directed ranks between `i` and `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalMatrix {
    values: IntMat,
}

impl OrdinalMatrix {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.values.get(i, j)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        self.values.row(i)
    }

    pub fn values(&self) -> &IntMat {
        &self.values
    }
}

/// Directed ordinal rank: `card{ k : D[i][k] < D[i][j] }`.
///
/// Tied distances share a rank because the count uses strict inequality;
/// the self distance `D[i][i] = 0` participates in the count, so the rank
/// of any distinct point at positive distance is at least 1.
pub fn ordinal_rank(d: &DistanceMatrix, i: usize, j: usize) -> u32 {
    let threshold = d.get(i, j);
    d.row(i).iter().filter(|&&v| v < threshold).count() as u32
}

/// Builds the symmetrized ordinal matrix in `O(n^2 log n)`: each row is
/// sorted once and ranks are assigned by scanning for strict value
/// increases, which reproduces the strict-count definition under ties.
pub fn ordinal_matrix(d: &DistanceMatrix) -> OrdinalMatrix {
    let n = d.n();
    let directed: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| rank_row(d.row(i)))
        .collect();

    let mut values = IntMat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = directed[i][j].max(directed[j][i]);
            values.set(i, j, r);
            values.set(j, i, r);
        }
    }
    OrdinalMatrix { values }
}

/// Ranks one row: `out[j]` = number of entries strictly smaller than
/// `row[j]`.
fn rank_row(row: &[f64]) -> Vec<u32> {
    let n = row.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap());

    let mut ranks = vec![0u32; n];
    let mut rank_of_value = 0u32;
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 && row[idx] > row[order[pos - 1]] {
            rank_of_value = pos as u32;
        }
        ranks[idx] = rank_of_value;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::Metric;
    use crate::matrix::Mat;
    use crate::rng::CounterRng;

    fn dist_from_points_1d(points: &[f64]) -> DistanceMatrix {
        let n = points.len();
        let m = Mat::from_fn(n, n, |i, j| (points[i] - points[j]).abs());
        DistanceMatrix::new(m, Metric::Euclidean).unwrap()
    }

    /// Direct evaluation of the strict-count definition, used as the oracle.
    fn naive_rank(d: &DistanceMatrix, i: usize, j: usize) -> u32 {
        (0..d.n()).filter(|&k| d.get(i, k) < d.get(i, j)).count() as u32
    }

    #[test]
    fn line_points_hand_enumerated() {
        // points at 0, 1, 3
        let d = dist_from_points_1d(&[0.0, 1.0, 3.0]);
        assert_eq!(ordinal_rank(&d, 0, 2), 2);
        assert_eq!(ordinal_rank(&d, 2, 0), 2);
        assert_eq!(ordinal_rank(&d, 1, 2), 2);
        assert_eq!(ordinal_rank(&d, 2, 1), 1);

        let o = ordinal_matrix(&d);
        assert_eq!(o.get(0, 2), 2);
        assert_eq!(o.get(1, 2), 2);
        assert_eq!(o.get(0, 1), 1);
        assert!(o.values().is_symmetric());
    }

    #[test]
    fn self_rank_is_zero() {
        let d = dist_from_points_1d(&[0.0, 5.0, 2.0, 9.0]);
        for i in 0..4 {
            assert_eq!(ordinal_rank(&d, i, i), 0);
        }
    }

    #[test]
    fn equidistant_row_all_rank_one() {
        // regular simplex: every off-diagonal distance equal
        let n = 5;
        let m = Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        let d = DistanceMatrix::new(m, Metric::Precomputed).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert_eq!(ordinal_rank(&d, i, j), 1);
                }
            }
        }
    }

    #[test]
    fn two_points() {
        let d = dist_from_points_1d(&[0.0, 1.0]);
        let o = ordinal_matrix(&d);
        assert_eq!(o.get(0, 0), 0);
        assert_eq!(o.get(0, 1), 1);
        assert_eq!(o.get(1, 0), 1);
    }

    #[test]
    fn scale_invariance() {
        let mut rng = CounterRng::new(99);
        let n = 20;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.1 + rng.next_f64() * 10.0;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let d = DistanceMatrix::new(m.clone(), Metric::Precomputed).unwrap();
        let o = ordinal_matrix(&d);

        let mut scaled = m;
        for i in 0..n {
            for j in 0..n {
                let v = scaled.get(i, j) * 3.25;
                scaled.set(i, j, v);
            }
        }
        let ds = DistanceMatrix::new(scaled, Metric::Precomputed).unwrap();
        assert_eq!(ordinal_matrix(&ds), o);
    }

    #[test]
    fn rank_row_matches_naive_with_ties() {
        // row with deliberate ties
        let mut m = Mat::zeros(6, 6);
        let rows = [
            [0.0, 2.0, 2.0, 1.0, 5.0, 2.0],
            [2.0, 0.0, 3.0, 3.0, 3.0, 1.0],
        ];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if i != j {
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
        }
        // fill the remaining pairs distinctly
        let mut c = 7.0;
        for i in 0..6 {
            for j in (i + 1)..6 {
                if m.get(i, j) == 0.0 {
                    m.set(i, j, c);
                    m.set(j, i, c);
                    c += 1.0;
                }
            }
        }
        let d = DistanceMatrix::new(m, Metric::Precomputed).unwrap();
        for i in 0..6 {
            let fast = rank_row(d.row(i));
            for j in 0..6 {
                assert_eq!(fast[j], naive_rank(&d, i, j), "row {i} col {j}");
            }
        }
    }

    #[test]
    fn directed_ranks_are_a_permutation_without_ties() {
        let mut rng = CounterRng::new(8);
        let n = 25;
        let points: Vec<f64> = (0..n).map(|_| rng.next_f64() * 40.0).collect();
        let d = dist_from_points_1d(&points);
        for i in 0..n {
            let mut ranks: Vec<u32> = (0..n)
                .filter(|&j| j != i)
                .map(|j| ordinal_rank(&d, i, j))
                .collect();
            ranks.sort_unstable();
            let expected: Vec<u32> = (1..n as u32).collect();
            assert_eq!(ranks, expected, "row {i}");
        }
    }

    #[test]
    fn monotone_transform_invariance() {
        let mut rng = CounterRng::new(4242);
        let n = 30;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 + rng.next_f64() * 4.0;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let d = DistanceMatrix::new(m.clone(), Metric::Precomputed).unwrap();
        let o = ordinal_matrix(&d);

        let transforms: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(|t| t * t),
            Box::new(|t| (1.0 + t).ln()),
            Box::new(|t| 0.37 * t),
        ];
        for g in &transforms {
            let gm = Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { g(m.get(i, j)) });
            let gd = DistanceMatrix::new(gm, Metric::Precomputed).unwrap();
            assert_eq!(ordinal_matrix(&gd), o);
        }
    }
}

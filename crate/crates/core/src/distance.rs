//! Pairwise distance matrices.

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::matrix::Mat;

/// How a distance matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Cosine,
    /// Loaded or derived rather than computed from features.
    Precomputed,
}

/// Symmetric nonnegative pairwise distances with a zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    values: Mat,
    metric: Metric,
}

impl DistanceMatrix {
    /// Validates the distance-matrix invariants: square, exactly symmetric,
    /// zero diagonal, finite nonnegative entries.
    pub fn new(values: Mat, metric: Metric) -> Result<Self> {
        let n = values.rows();
        if values.cols() != n {
            return Err(Error::Dimension(format!(
                "distance matrix must be square, got {}x{}",
                n,
                values.cols()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(
                "distance matrix needs at least 2 samples".into(),
            ));
        }
        for i in 0..n {
            if values.get(i, i) != 0.0 {
                return Err(Error::Format(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let v = values.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Format(format!("bad distance {v} at ({i},{j})")));
                }
                if v != values.get(j, i) {
                    return Err(Error::Format(format!("asymmetry at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { values, metric })
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn into_values(self) -> Mat {
        self.values
    }
}

/// Computes the pairwise distance matrix of `x` under `metric`.
///
/// Each unordered pair is evaluated exactly once and mirrored, so the result
/// is exactly symmetric no matter how rows are scheduled across threads.
pub fn compute_distance_matrix(x: &DataMatrix, metric: Metric) -> Result<DistanceMatrix> {
    let n = x.len();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| x.sample(j)).collect();

    let norms: Vec<f64> = match metric {
        Metric::Cosine => {
            let norms: Vec<f64> = cols
                .iter()
                .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
                .collect();
            if let Some(bad) = norms.iter().position(|&v| v == 0.0) {
                return Err(Error::ZeroNorm(bad));
            }
            norms
        }
        Metric::Euclidean => Vec::new(),
        Metric::Precomputed => {
            return Err(Error::InvalidArgument(
                "precomputed is not a computable metric".into(),
            ))
        }
    };

    // upper triangle, one row strip per task
    let strips: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = &cols[i];
            ((i + 1)..n)
                .map(|j| {
                    let b = &cols[j];
                    match metric {
                        Metric::Euclidean => a
                            .iter()
                            .zip(b)
                            .map(|(u, v)| (u - v) * (u - v))
                            .sum::<f64>()
                            .sqrt(),
                        Metric::Cosine => {
                            let dot: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
                            // clamp: rounding may push 1 - cos slightly negative
                            (1.0 - dot / (norms[i] * norms[j])).max(0.0)
                        }
                        Metric::Precomputed => unreachable!(),
                    }
                })
                .collect()
        })
        .collect();

    let mut values = Mat::zeros(n, n);
    for (i, strip) in strips.iter().enumerate() {
        for (off, &d) in strip.iter().enumerate() {
            let j = i + 1 + off;
            values.set(i, j, d);
            values.set(j, i, d);
        }
    }
    DistanceMatrix::new(values, metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn data(d: usize, n: usize, vals: Vec<f64>) -> DataMatrix {
        DataMatrix::from_values(Mat::from_vec(d, n, vals)).unwrap()
    }

    #[test]
    fn euclidean_3_4_5() {
        // columns (0,0) and (3,4)
        let x = data(2, 2, vec![0.0, 3.0, 0.0, 4.0]);
        let d = compute_distance_matrix(&x, Metric::Euclidean).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 0), 5.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn identical_columns_zero() {
        let x = data(3, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        for m in [Metric::Euclidean, Metric::Cosine] {
            let d = compute_distance_matrix(&x, m).unwrap();
            assert_eq!(d.get(0, 1), 0.0);
        }
    }

    #[test]
    fn cosine_orthogonal_unit() {
        let x = data(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let d = compute_distance_matrix(&x, Metric::Cosine).unwrap();
        assert_eq!(d.get(0, 1), 1.0);
    }

    #[test]
    fn cosine_zero_norm_errors() {
        let x = data(2, 2, vec![1.0, 0.0, 1.0, 0.0]);
        let err = compute_distance_matrix(&x, Metric::Cosine).unwrap_err();
        assert!(matches!(err, Error::ZeroNorm(1)), "{err}");
    }

    proptest! {
        #[test]
        fn euclidean_triangle_inequality(
            vals in proptest::collection::vec(-50.0f64..50.0, 3 * 6),
        ) {
            let x = data(3, 6, vals);
            let d = compute_distance_matrix(&x, Metric::Euclidean).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    for k in 0..6 {
                        prop_assert!(d.get(i, j) <= d.get(i, k) + d.get(k, j) + 1e-9);
                    }
                }
            }
        }

        #[test]
        fn permutation_equivariance(
            vals in proptest::collection::vec(-10.0f64..10.0, 4 * 5),
            rot in 0usize..5,
        ) {
            let x = data(4, 5, vals.clone());
            let d = compute_distance_matrix(&x, Metric::Euclidean).unwrap();

            // cyclic permutation of the samples
            let perm: Vec<usize> = (0..5).map(|j| (j + rot) % 5).collect();
            let permuted: Vec<f64> = (0..4)
                .flat_map(|i| perm.iter().map(|&pj| vals[i * 5 + pj]).collect::<Vec<_>>())
                .collect();
            let xp = data(4, 5, permuted);
            let dp = compute_distance_matrix(&xp, Metric::Euclidean).unwrap();

            for a in 0..5 {
                for b in 0..5 {
                    prop_assert_eq!(dp.get(a, b), d.get(perm[a], perm[b]));
                }
            }
        }
    }
}

//! K-means pseudo-labeling on embedding coordinates.

use crate::data::LabelVector;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::rng::CounterRng;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: LabelVector,
    /// One centroid per row, matching the coordinate layout.
    pub centroids: Mat,
    /// Sum of squared distances from each point to its assigned centroid.
    pub inertia: f64,
    pub iterations_run: usize,
}

/// Lloyd's algorithm with k-means++ seeding, best of `n_init` restarts by
/// inertia (ties broken by the lowest restart index). Empty clusters are
/// repaired by stealing the point farthest from its assigned centroid.
///
/// `coords` holds one point per row.
pub fn kmeans(
    coords: &Mat,
    n_clusters: usize,
    seed: u64,
    n_init: usize,
    max_iter: usize,
) -> Result<KMeansResult> {
    let n = coords.rows();
    if n_clusters < 1 || n_clusters > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {n_clusters} out of range [1, {n}]"
        )));
    }
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "coordinates contain non-finite values".into(),
        ));
    }
    let n_init = n_init.max(1);
    let mut best: Option<KMeansResult> = None;
    for run in 0..n_init {
        let (result, _) =
            kmeans_single(coords, n_clusters, seed.wrapping_add(run as u64), max_iter)?;
        let better = match &best {
            None => true,
            Some(b) => result.inertia < b.inertia,
        };
        if better {
            best = Some(result);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

/// One seeded run. Also returns the inertia measured after every Lloyd
/// iteration, which must be non-increasing.
fn kmeans_single(
    coords: &Mat,
    n_clusters: usize,
    seed: u64,
    max_iter: usize,
) -> Result<(KMeansResult, Vec<f64>)> {
    let (n, dim) = (coords.rows(), coords.cols());
    let mut rng = CounterRng::from_parts(&[seed, 0x6b6d_6561_6e73]);

    let mut centroids = plus_plus_init(coords, n_clusters, &mut rng);
    let mut assignment = vec![usize::MAX; n];
    let mut iterations_run = 0;
    let mut inertia_trace = Vec::new();

    for iter in 0..max_iter.max(1) {
        iterations_run = iter + 1;

        // assignment step
        let mut changed = false;
        for i in 0..n {
            let (mut best_c, mut best_d) = (0, f64::INFINITY);
            for c in 0..n_clusters {
                let d = sq_dist(coords.row(i), centroids.row(c));
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if assignment[i] != best_c {
                assignment[i] = best_c;
                changed = true;
            }
        }

        repair_empty_clusters(coords, &mut centroids, &mut assignment, n_clusters);

        if !changed && iter > 0 {
            break;
        }

        // update step
        let mut counts = vec![0usize; n_clusters];
        let mut sums = Mat::zeros(n_clusters, dim);
        for i in 0..n {
            let c = assignment[i];
            counts[c] += 1;
            for (s, &v) in sums.row_mut(c).iter_mut().zip(coords.row(i)) {
                *s += v;
            }
        }
        for c in 0..n_clusters {
            if counts[c] > 0 {
                for s in sums.row_mut(c) {
                    *s /= counts[c] as f64;
                }
                centroids.row_mut(c).copy_from_slice(sums.row(c));
            }
        }

        inertia_trace.push(
            (0..n)
                .map(|i| sq_dist(coords.row(i), centroids.row(assignment[i])))
                .sum(),
        );
    }

    let inertia: f64 = (0..n)
        .map(|i| sq_dist(coords.row(i), centroids.row(assignment[i])))
        .sum();
    Ok((
        KMeansResult {
            labels: LabelVector::with_classes(assignment, n_clusters)?,
            centroids,
            inertia,
            iterations_run,
        },
        inertia_trace,
    ))
}

/// K-means++ seeding: first centroid uniform, the rest weighted by squared
/// distance to the closest centroid chosen so far.
fn plus_plus_init(coords: &Mat, n_clusters: usize, rng: &mut CounterRng) -> Mat {
    let (n, dim) = (coords.rows(), coords.cols());
    let mut centroids = Mat::zeros(n_clusters, dim);
    let mut chosen = vec![false; n];

    let first = rng.next_range(n);
    centroids.row_mut(0).copy_from_slice(coords.row(first));
    chosen[first] = true;

    let mut closest: Vec<f64> = (0..n)
        .map(|i| sq_dist(coords.row(i), centroids.row(0)))
        .collect();

    for c in 1..n_clusters {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.next_f64() * total;
            let mut pick = None;
            for (i, &w) in closest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                target -= w;
                if target <= 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            // rounding may leave target marginally positive after the loop
            pick.unwrap_or_else(|| closest.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // all remaining points coincide with a centroid
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[pick] = true;
        centroids.row_mut(c).copy_from_slice(coords.row(pick));
        for i in 0..n {
            let d = sq_dist(coords.row(i), centroids.row(c));
            if d < closest[i] {
                closest[i] = d;
            }
        }
    }
    centroids
}

/// Reseeds each empty cluster with the point farthest from its current
/// centroid, then leaves the next assignment pass to settle membership.
fn repair_empty_clusters(
    coords: &Mat,
    centroids: &mut Mat,
    assignment: &mut [usize],
    n_clusters: usize,
) {
    loop {
        let mut counts = vec![0usize; n_clusters];
        for &a in assignment.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let (mut worst_i, mut worst_d) = (0, -1.0);
        for (i, &a) in assignment.iter().enumerate() {
            // only steal from clusters that can spare a point
            if counts[a] > 1 {
                let d = sq_dist(coords.row(i), centroids.row(a));
                if d > worst_d {
                    worst_d = d;
                    worst_i = i;
                }
            }
        }
        if worst_d < 0.0 {
            // nothing left to steal; unreachable when n >= n_clusters
            return;
        }
        assignment[worst_i] = empty;
        centroids.row_mut(empty).copy_from_slice(coords.row(worst_i));
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob_coords(n_per: usize, centers: &[(f64, f64)], spread: f64, seed: u64) -> Mat {
        let mut rng = CounterRng::new(seed);
        let n = n_per * centers.len();
        let mut m = Mat::zeros(n, 2);
        for (b, &(cx, cy)) in centers.iter().enumerate() {
            for i in 0..n_per {
                let row = b * n_per + i;
                m.set(row, 0, cx + spread * rng.next_normal());
                m.set(row, 1, cy + spread * rng.next_normal());
            }
        }
        m
    }

    #[test]
    fn one_cluster_is_mean() {
        let coords = blob_coords(20, &[(3.0, -1.0)], 1.0, 7);
        let r = kmeans(&coords, 1, 42, 10, 300).unwrap();
        assert!(r.labels.as_slice().iter().all(|&l| l == 0));
        let mean_x: f64 = (0..20).map(|i| coords.get(i, 0)).sum::<f64>() / 20.0;
        assert!((r.centroids.get(0, 0) - mean_x).abs() < 1e-12);
    }

    #[test]
    fn n_clusters_equals_n() {
        let coords = blob_coords(6, &[(0.0, 0.0)], 5.0, 9);
        let r = kmeans(&coords, 6, 42, 10, 300).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut seen = r.labels.as_slice().to_vec();
        seen.sort_unstable();
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn two_blobs_separate_exactly() {
        let coords = blob_coords(50, &[(-10.0, 0.0), (10.0, 0.0)], 1.0, 11);
        let r = kmeans(&coords, 2, 42, 10, 300).unwrap();
        let truth = LabelVector::new(
            (0..100).map(|i| usize::from(i >= 50)).collect::<Vec<_>>(),
        )
        .unwrap();
        let acc = crate::accuracy::accuracy(&r.labels, &truth).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn inertia_matches_recomputation() {
        let coords = blob_coords(30, &[(0.0, 0.0), (4.0, 4.0)], 1.5, 13);
        let r = kmeans(&coords, 2, 1, 10, 300).unwrap();
        let recomputed: f64 = (0..coords.rows())
            .map(|i| sq_dist(coords.row(i), r.centroids.row(r.labels.get(i))))
            .sum();
        assert!((r.inertia - recomputed).abs() < 1e-9);
    }

    #[test]
    fn every_cluster_nonempty() {
        // pathological: many clusters, clumped data
        let coords = blob_coords(30, &[(0.0, 0.0)], 0.01, 3);
        let r = kmeans(&coords, 8, 5, 10, 300).unwrap();
        let mut counts = vec![0; 8];
        for &l in r.labels.as_slice() {
            counts[l] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
    }

    #[test]
    fn inertia_non_increasing_within_run() {
        let coords = blob_coords(40, &[(0.0, 0.0), (5.0, 5.0), (9.0, -4.0)], 2.0, 19);
        for seed in 0..5 {
            let (_, trace) = kmeans_single(&coords, 3, seed, 300).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "inertia increased: {w:?}");
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let coords = blob_coords(40, &[(0.0, 0.0), (6.0, 1.0), (-3.0, 8.0)], 1.0, 21);
        let a = kmeans(&coords, 3, 77, 10, 300).unwrap();
        let b = kmeans(&coords, 3, 77, 10, 300).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.inertia, b.inertia);
    }

    #[test]
    fn too_many_clusters_rejected() {
        let coords = blob_coords(4, &[(0.0, 0.0)], 1.0, 2);
        assert!(kmeans(&coords, 5, 0, 1, 10).is_err());
    }
}

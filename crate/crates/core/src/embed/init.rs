//! Embedding initializers: classical MDS on the input distances (default),
//! spectral coordinates of the fuzzy graph, or random placement.

use crate::distance::DistanceMatrix;
use crate::embed::eigen::top_eigenpairs_sym;
use crate::embed::fuzzy::FuzzyGraph;
use crate::matrix::Mat;
use crate::rng::CounterRng;

/// Classical multidimensional scaling: double-centers the squared distances
/// and maps the top `k` eigenpairs to coordinates scaled by root
/// eigenvalues. Negative eigenvalues (non-Euclidean inputs) clamp to zero.
///
/// On a distance matrix generated from points living in `k` dimensions this
/// recovers the configuration up to a rigid transform.
pub fn classical_mds(d: &DistanceMatrix, k: usize) -> Mat {
    let n = d.n();
    let sq = Mat::from_fn(n, n, |i, j| d.get(i, j) * d.get(i, j));

    let mut row_mean = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..n {
        let s: f64 = sq.row(i).iter().sum();
        row_mean[i] = s / n as f64;
        grand += s;
    }
    grand /= (n * n) as f64;

    // gram = -1/2 J D^2 J; symmetric by construction
    let gram = Mat::from_fn(n, n, |i, j| {
        -0.5 * (sq.get(i, j) - row_mean[i] - row_mean[j] + grand)
    });

    let apply = |q: &Mat| gram.matmul(q);
    let (eigvals, eigvecs) = top_eigenpairs_sym(n, k, &apply);

    let mut coords = Mat::zeros(n, k);
    for a in 0..k {
        let scale = eigvals[a].max(0.0).sqrt();
        for i in 0..n {
            coords.set(i, a, eigvecs.get(i, a) * scale);
        }
    }
    fix_column_signs(&mut coords);
    coords
}

/// Spectral coordinates: eigenvectors of the degree-normalized adjacency of
/// the fuzzy graph, skipping the trivial stationary direction.
pub fn spectral_init(graph: &FuzzyGraph, k: usize) -> Mat {
    let n = graph.n();
    let mut degree = vec![0.0_f64; n];
    for e in graph.edges() {
        degree[e.i] += e.weight;
        degree[e.j] += e.weight;
    }
    let inv_sqrt: Vec<f64> = degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();

    let apply = |q: &Mat| {
        let p = q.cols();
        let mut out = Mat::zeros(n, p);
        for e in graph.edges() {
            let w_ij = e.weight * inv_sqrt[e.i] * inv_sqrt[e.j];
            for c in 0..p {
                let add_i = w_ij * q.get(e.j, c);
                let add_j = w_ij * q.get(e.i, c);
                out.set(e.i, c, out.get(e.i, c) + add_i);
                out.set(e.j, c, out.get(e.j, c) + add_j);
            }
        }
        out
    };

    let (_, eigvecs) = top_eigenpairs_sym(n, k + 1, &apply);
    // drop the leading (trivial) eigenvector
    let mut coords = Mat::zeros(n, k);
    for a in 0..k {
        for i in 0..n {
            coords.set(i, a, eigvecs.get(i, a + 1));
        }
    }
    fix_column_signs(&mut coords);
    coords
}

pub fn random_init(n: usize, k: usize, seed: u64) -> Mat {
    let mut rng = CounterRng::from_parts(&[seed, 0x7261_6e64_5f69]);
    Mat::from_fn(n, k, |_, _| 20.0 * rng.next_f64() - 10.0)
}

/// Rescales every axis to the requested standard deviation (degenerate axes
/// are left untouched).
pub fn rescale_axes(coords: &mut Mat, target_sd: f64) {
    let (n, k) = (coords.rows(), coords.cols());
    for a in 0..k {
        let mean: f64 = (0..n).map(|i| coords.get(i, a)).sum::<f64>() / n as f64;
        let var: f64 = (0..n)
            .map(|i| (coords.get(i, a) - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        let sd = var.sqrt();
        if sd > 0.0 {
            let scale = target_sd / sd;
            for i in 0..n {
                coords.set(i, a, (coords.get(i, a) - mean) * scale);
            }
        }
    }
}

/// Flips each column so its largest-magnitude component is positive, fixing
/// the eigenvector sign ambiguity.
fn fix_column_signs(coords: &mut Mat) {
    let (n, k) = (coords.rows(), coords.cols());
    for a in 0..k {
        let mut best = 0;
        for i in 1..n {
            if coords.get(i, a).abs() > coords.get(best, a).abs() {
                best = i;
            }
        }
        if coords.get(best, a) < 0.0 {
            for i in 0..n {
                coords.set(i, a, -coords.get(i, a));
            }
        }
    }
}

/// RMS misfit between two 2D configurations after the best rigid alignment
/// (translation, rotation, and reflection if it helps).
pub fn procrustes_residual_2d(target: &Mat, candidate: &Mat) -> f64 {
    assert_eq!(target.rows(), candidate.rows());
    assert_eq!(target.cols(), 2);
    assert_eq!(candidate.cols(), 2);
    let base = aligned_rms(target, candidate);
    let reflected = Mat::from_fn(candidate.rows(), 2, |i, j| {
        if j == 1 {
            -candidate.get(i, 1)
        } else {
            candidate.get(i, 0)
        }
    });
    base.min(aligned_rms(target, &reflected))
}

fn aligned_rms(x: &Mat, y: &Mat) -> f64 {
    let n = x.rows();
    let center = |m: &Mat| -> Mat {
        let cx: f64 = (0..n).map(|i| m.get(i, 0)).sum::<f64>() / n as f64;
        let cy: f64 = (0..n).map(|i| m.get(i, 1)).sum::<f64>() / n as f64;
        Mat::from_fn(n, 2, |i, j| m.get(i, j) - if j == 0 { cx } else { cy })
    };
    let xc = center(x);
    let yc = center(y);

    // closed-form optimal rotation in the plane
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..n {
        a += yc.get(i, 0) * xc.get(i, 0) + yc.get(i, 1) * xc.get(i, 1);
        b += yc.get(i, 0) * xc.get(i, 1) - yc.get(i, 1) * xc.get(i, 0);
    }
    let r = (a * a + b * b).sqrt();
    let (cos_t, sin_t) = if r > 0.0 { (a / r, b / r) } else { (1.0, 0.0) };

    let mut sum_sq = 0.0;
    for i in 0..n {
        let rx = cos_t * yc.get(i, 0) - sin_t * yc.get(i, 1);
        let ry = sin_t * yc.get(i, 0) + cos_t * yc.get(i, 1);
        sum_sq += (xc.get(i, 0) - rx).powi(2) + (xc.get(i, 1) - ry).powi(2);
    }
    (sum_sq / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::Metric;

    fn distances_from_2d(points: &[(f64, f64)]) -> DistanceMatrix {
        let n = points.len();
        let m = Mat::from_fn(n, n, |i, j| {
            let (xi, yi) = points[i];
            let (xj, yj) = points[j];
            ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt()
        });
        DistanceMatrix::new(m, Metric::Precomputed).unwrap()
    }

    #[test]
    fn mds_recovers_planted_configuration() {
        let mut rng = CounterRng::new(2024);
        let points: Vec<(f64, f64)> = (0..40)
            .map(|_| (4.0 * rng.next_f64() - 2.0, 4.0 * rng.next_f64() - 2.0))
            .collect();
        let d = distances_from_2d(&points);
        let coords = classical_mds(&d, 2);
        let target = Mat::from_fn(40, 2, |i, j| if j == 0 { points[i].0 } else { points[i].1 });
        let residual = procrustes_residual_2d(&target, &coords);
        assert!(residual < 1e-6, "residual = {residual:e}");
    }

    #[test]
    fn mds_rotated_translated_inputs_match() {
        // a distance matrix carries no pose, so MDS of a moved configuration
        // must match the original after alignment
        let pts: Vec<(f64, f64)> = vec![(0.0, 0.0), (1.0, 0.2), (2.0, 1.4), (0.5, 2.0), (3.0, 0.0)];
        let moved: Vec<(f64, f64)> = pts
            .iter()
            .map(|&(x, y)| {
                let (c, s) = (0.6_f64.cos(), 0.6_f64.sin());
                (c * x - s * y + 10.0, s * x + c * y - 4.0)
            })
            .collect();
        let a = classical_mds(&distances_from_2d(&pts), 2);
        let b = classical_mds(&distances_from_2d(&moved), 2);
        assert!(procrustes_residual_2d(&a, &b) < 1e-8);
    }

    #[test]
    fn rescale_hits_target_sd() {
        let mut m = Mat::from_fn(50, 2, |i, j| (i as f64) * (j as f64 + 1.0));
        rescale_axes(&mut m, 1e-2);
        for a in 0..2 {
            let mean: f64 = (0..50).map(|i| m.get(i, a)).sum::<f64>() / 50.0;
            let sd = ((0..50).map(|i| (m.get(i, a) - mean).powi(2)).sum::<f64>() / 50.0).sqrt();
            assert!((sd - 1e-2).abs() < 1e-12);
        }
    }

    #[test]
    fn procrustes_zero_for_identical() {
        let m = Mat::from_fn(10, 2, |i, j| (i * 2 + j) as f64);
        assert!(procrustes_residual_2d(&m, &m) < 1e-14);
    }
}

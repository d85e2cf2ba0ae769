//! Fuzzy neighborhood graph built from a precomputed distance matrix.
//!
//! For each point: take the `n_neighbors` nearest others (ties broken by
//! index), subtract the nearest-neighbor offset, and calibrate a per-row
//! bandwidth by bisection so the membership row sums to `log2(n_neighbors)`.
//! Directed memberships are then combined with the fuzzy union
//! `w1 + w2 - w1 * w2`.

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

const BISECTION_ITERS: usize = 64;
const BISECTION_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Symmetric weighted graph plus the per-row calibration data.
#[derive(Debug, Clone)]
pub struct FuzzyGraph {
    n: usize,
    edges: Vec<Edge>,
    /// Nearest-neighbor distance per row (the local connectivity offset).
    rho: Vec<f64>,
    /// Calibrated bandwidth per row.
    beta: Vec<f64>,
    /// Selected neighbor indices per row, nearest first.
    neighbors: Vec<Vec<usize>>,
}

impl FuzzyGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    /// Directed membership of `j` in `i`'s neighborhood.
    pub fn directed_weight(&self, d: &DistanceMatrix, i: usize, j: usize) -> f64 {
        membership(d.get(i, j), self.rho[i], self.beta[i])
    }
}

#[inline]
fn membership(dist: f64, rho: f64, beta: f64) -> f64 {
    (-( (dist - rho).max(0.0) / beta)).exp()
}

/// Builds the fuzzy graph. Fails with `DegenerateInput` when the distance
/// matrix is identically zero off the diagonal.
pub fn build_fuzzy_graph(d: &DistanceMatrix, n_neighbors: usize) -> Result<FuzzyGraph> {
    let n = d.n();
    if n_neighbors < 2 || n_neighbors >= n {
        return Err(Error::InvalidArgument(format!(
            "n_neighbors must be in [2, n), got {n_neighbors} for n = {n}"
        )));
    }
    if (0..n).all(|i| d.row(i).iter().all(|&v| v == 0.0)) {
        return Err(Error::DegenerateInput(
            "distance matrix is identically zero".into(),
        ));
    }

    let target = (n_neighbors as f64).log2();
    let mut rho = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut neighbors = Vec::with_capacity(n);

    for i in 0..n {
        // nearest n_neighbors, excluding self, ties by index
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            d.get(i, a)
                .partial_cmp(&d.get(i, b))
                .unwrap()
                .then(a.cmp(&b))
        });
        order.truncate(n_neighbors);

        rho[i] = d.get(i, order[0]);
        beta[i] = calibrate_beta(d.row(i), &order, rho[i], target);
        neighbors.push(order);
    }

    // fuzzy union of the two directed memberships, each pair emitted once
    let mut directed: Vec<(usize, usize, f64, bool)> = Vec::new();
    for (i, nbrs) in neighbors.iter().enumerate() {
        for &j in nbrs {
            let w = membership(d.get(i, j), rho[i], beta[i]);
            let (lo, hi) = (i.min(j), i.max(j));
            directed.push((lo, hi, w, i < j));
        }
    }
    directed.sort_by_key(|&(i, j, _, _)| (i, j));

    let mut edges = Vec::new();
    let mut idx = 0;
    while idx < directed.len() {
        let (i, j, _, _) = directed[idx];
        let mut forward = 0.0;
        let mut backward = 0.0;
        while idx < directed.len() && directed[idx].0 == i && directed[idx].1 == j {
            if directed[idx].3 {
                forward = directed[idx].2;
            } else {
                backward = directed[idx].2;
            }
            idx += 1;
        }
        let weight = forward + backward - forward * backward;
        if weight > 0.0 {
            edges.push(Edge { i, j, weight });
        }
    }

    Ok(FuzzyGraph {
        n,
        edges,
        rho,
        beta,
        neighbors,
    })
}

/// Bisection for the bandwidth: the membership row sum is increasing in
/// beta, so the bracket halves from an expanding upper bound.
fn calibrate_beta(row: &[f64], neighbors: &[usize], rho: f64, target: f64) -> f64 {
    let row_sum = |beta: f64| -> f64 {
        neighbors
            .iter()
            .map(|&j| membership(row[j], rho, beta))
            .sum()
    };

    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    let mut mid = 1.0_f64;
    for _ in 0..BISECTION_ITERS {
        let sum = row_sum(mid);
        if (sum - target).abs() < BISECTION_TOL {
            break;
        }
        if sum > target {
            hi = mid;
            mid = (lo + hi) / 2.0;
        } else {
            lo = mid;
            mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
        }
    }
    mid
}

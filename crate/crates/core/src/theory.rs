//! Monte Carlo checks of the two distance-concentration results: the
//! high-dimensional ordering of inter- vs intra-cluster distances and the
//! stability of distance ranks under Gaussian perturbation.

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::distance::{compute_distance_matrix, Metric};
use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Two isotropic Gaussian clusters in `d` dimensions.
#[derive(Debug, Clone)]
pub struct GaussianPairModel {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub d: usize,
}

impl GaussianPairModel {
    /// Zero-mean model with the given spreads.
    pub fn centered(sigma1: f64, sigma2: f64, d: usize) -> Self {
        GaussianPairModel {
            mu1: vec![0.0; d],
            mu2: vec![0.0; d],
            sigma1,
            sigma2,
            d,
        }
    }

    /// Zero mean for cluster 1, cluster 2 offset along the first axis.
    pub fn offset(sigma1: f64, sigma2: f64, separation: f64, d: usize) -> Self {
        let mut mu2 = vec![0.0; d];
        mu2[0] = separation;
        GaussianPairModel {
            mu1: vec![0.0; d],
            mu2,
            sigma1,
            sigma2,
            d,
        }
    }

    pub fn mean_gap_sq(&self) -> f64 {
        self.mu1
            .iter()
            .zip(&self.mu2)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// The separability scalar `sigma2^2 - sigma1^2 + ||mu1 - mu2||^2`.
    pub fn separability(&self) -> f64 {
        self.sigma2 * self.sigma2 - self.sigma1 * self.sigma1 + self.mean_gap_sq()
    }

    /// Swaps which cluster is treated as "intra".
    pub fn swapped(&self) -> Self {
        GaussianPairModel {
            mu1: self.mu2.clone(),
            mu2: self.mu1.clone(),
            sigma1: self.sigma2,
            sigma2: self.sigma1,
            d: self.d,
        }
    }
}

/// Monte Carlo estimate of the ordering failure probability
/// `P(d_ij >= d_ik)`: the chance that an intra-cluster squared distance is
/// at least the inter-cluster one on an independent triple.
///
/// Returns the mean over trials and the standard error across trials.
pub fn mc_order_probability(
    model: &GaussianPairModel,
    pairs_per_trial: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if pairs_per_trial < 1 || trials < 1 {
        return Err(Error::InvalidArgument(
            "need at least one pair and one trial".into(),
        ));
    }
    let estimates: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = CounterRng::from_parts(&[seed, 0x0f19_2740, trial]);
            let mut failures = 0usize;
            for _ in 0..pairs_per_trial {
                // stream the coordinates; only the two squared norms matter
                let mut intra_sq = 0.0;
                let mut inter_sq = 0.0;
                for l in 0..model.d {
                    let xi = model.mu1[l] + model.sigma1 * rng.next_normal();
                    let xj = model.mu1[l] + model.sigma1 * rng.next_normal();
                    let yk = model.mu2[l] + model.sigma2 * rng.next_normal();
                    intra_sq += (xi - xj) * (xi - xj);
                    inter_sq += (xi - yk) * (xi - yk);
                }
                if intra_sq >= inter_sq {
                    failures += 1;
                }
            }
            failures as f64 / pairs_per_trial as f64
        })
        .collect();

    let mean = estimates.iter().sum::<f64>() / trials as f64;
    let stderr = if trials > 1 {
        let var = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

/// Cantelli lower bound on `P(Z > 0)` where `Z` is the inter-minus-intra
/// gap of squared distances.
///
/// Uses the exact chi-squared moments: `E[Z] = d(sigma2^2 - sigma1^2) +
/// ||mu1 - mu2||^2`, and the variance bound
/// `2 (Var(d_ik) + Var(d_ij))` expanded below. The bound is
/// `E[Z]^2 / (Var + E[Z]^2)`.
pub fn theoretical_bound_thm1(model: &GaussianPairModel) -> Result<f64> {
    if model.separability() <= 0.0 {
        return Err(Error::InvalidArgument(
            "separability must be positive for the bound to apply".into(),
        ));
    }
    let d = model.d as f64;
    let gap_sq = model.mean_gap_sq();
    let s1 = model.sigma1 * model.sigma1;
    let s2 = model.sigma2 * model.sigma2;

    let mean_z = d * (s2 - s1) + gap_sq;
    if mean_z <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "E[Z] = {mean_z} <= 0: the one-sided bound is vacuous here"
        )));
    }
    // Var(d_ij) = 8 d sigma1^4; Var(d_ik) = 2 d (s1+s2)^2 + 4 ||mu||^2 (s1+s2)
    let var_bound = 8.0 * gap_sq * (s1 + s2) + 4.0 * d * (s1 + s2) * (s1 + s2) + 16.0 * d * s1 * s1;
    Ok(mean_z * mean_z / (var_bound + mean_z * mean_z))
}

/// Noise-perturbation experiment setup: a fixed base configuration, a noise
/// scale, and the index triple whose distance ordering is watched.
#[derive(Debug, Clone)]
pub struct NoiseTrialConfig {
    pub base_points: DataMatrix,
    pub noise_sigma: f64,
    pub trials: usize,
    /// `(i, j, k)` with `D[i][j] < D[i][k]` on the noiseless distances.
    pub triple: (usize, usize, usize),
}

/// Draws fresh Gaussian noise per trial, recomputes the two perturbed
/// distances of the triple, and counts order flips. Returns the empirical
/// flip rate and the leading-order Chebyshev bound evaluated on the
/// noiseless distances.
pub fn mc_rank_flip_rate(cfg: &NoiseTrialConfig, seed: u64) -> Result<(f64, f64)> {
    if cfg.trials < 1 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if cfg.noise_sigma <= 0.0 || !cfg.noise_sigma.is_finite() {
        return Err(Error::InvalidArgument("noise_sigma must be positive".into()));
    }
    let (i, j, k) = cfg.triple;
    let n = cfg.base_points.len();
    if i >= n || j >= n || k >= n || i == j || i == k || j == k {
        return Err(Error::InvalidArgument(format!(
            "triple ({i}, {j}, {k}) is not three distinct indices below {n}"
        )));
    }
    let d = compute_distance_matrix(&cfg.base_points, Metric::Euclidean)?;
    let d_ij_sq = d.get(i, j) * d.get(i, j);
    let d_ik_sq = d.get(i, k) * d.get(i, k);
    if d_ij_sq >= d_ik_sq {
        return Err(Error::PreconditionViolated(format!(
            "require D[i][j] < D[i][k], got {} vs {}",
            d.get(i, j),
            d.get(i, k)
        )));
    }

    let bound = rank_flip_bound(cfg.base_points.dim(), cfg.noise_sigma, d.get(i, j), d.get(i, k));

    let xi = cfg.base_points.sample(i);
    let xj = cfg.base_points.sample(j);
    let xk = cfg.base_points.sample(k);
    let dim = cfg.base_points.dim();

    let flips: usize = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = CounterRng::from_parts(&[seed, 0x0f11_95a7, trial]);
            let mut perturbed_ij = 0.0;
            let mut perturbed_ik = 0.0;
            for l in 0..dim {
                let ei = cfg.noise_sigma * rng.next_normal();
                let ej = cfg.noise_sigma * rng.next_normal();
                let ek = cfg.noise_sigma * rng.next_normal();
                let dij = (xi[l] + ei) - (xj[l] + ej);
                let dik = (xi[l] + ei) - (xk[l] + ek);
                perturbed_ij += dij * dij;
                perturbed_ik += dik * dik;
            }
            usize::from(perturbed_ij > perturbed_ik)
        })
        .sum();

    Ok((flips as f64 / cfg.trials as f64, bound))
}

/// Leading-order flip-probability bound
/// `16 d sigma^2 (D_ij^2 + D_ik^2) / (D_ik^2 - D_ij^2)^2`.
pub fn rank_flip_bound(d: usize, sigma: f64, dist_ij: f64, dist_ik: f64) -> f64 {
    let ij_sq = dist_ij * dist_ij;
    let ik_sq = dist_ik * dist_ik;
    let delta = ik_sq - ij_sq;
    16.0 * d as f64 * sigma * sigma * (ij_sq + ik_sq) / (delta * delta)
}

/// One row of the dimension-sweep experiment.
#[derive(Debug, Clone, Copy)]
pub struct OrderSweepRow {
    pub d: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub cantelli_bound: f64,
}

/// Runs the ordering experiment over a dimension grid with the given
/// spreads and zero means.
pub fn order_probability_sweep(
    dims: &[usize],
    sigma1: f64,
    sigma2: f64,
    pairs_per_trial: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<OrderSweepRow>> {
    dims.iter()
        .map(|&d| {
            let model = GaussianPairModel::centered(sigma1, sigma2, d);
            let (estimate, stderr) = mc_order_probability(&model, pairs_per_trial, trials, seed)?;
            let cantelli_bound = theoretical_bound_thm1(&model)?;
            Ok(OrderSweepRow {
                d,
                estimate,
                stderr,
                cantelli_bound,
            })
        })
        .collect()
}

/// Builds a random Gaussian point cloud for flip-rate experiments and picks
/// the triple `(0, nearest(0), farthest(0))`.
pub fn random_flip_config(
    d: usize,
    n: usize,
    noise_sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<NoiseTrialConfig> {
    let mut rng = CounterRng::from_parts(&[seed, 0xf11b]);
    let mut values = crate::matrix::Mat::zeros(d, n);
    for j in 0..n {
        for i in 0..d {
            values.set(i, j, rng.next_normal());
        }
    }
    let base_points = DataMatrix::from_values(values)?;
    let dist = compute_distance_matrix(&base_points, Metric::Euclidean)?;
    let mut nearest = 1;
    let mut farthest = 1;
    for j in 1..n {
        if dist.get(0, j) < dist.get(0, nearest) {
            nearest = j;
        }
        if dist.get(0, j) > dist.get(0, farthest) {
            farthest = j;
        }
    }
    Ok(NoiseTrialConfig {
        base_points,
        noise_sigma,
        trials,
        triple: (0, nearest, farthest),
    })
}

/// Distances of the chosen triple on the noiseless configuration.
pub fn triple_distances(cfg: &NoiseTrialConfig) -> Result<(f64, f64)> {
    let d = compute_distance_matrix(&cfg.base_points, Metric::Euclidean)?;
    let (i, j, k) = cfg.triple;
    Ok((d.get(i, j), d.get(i, k)))
}

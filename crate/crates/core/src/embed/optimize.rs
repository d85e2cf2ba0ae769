//! Stochastic attraction/repulsion layout optimization.
//!
//! Each epoch draws `|E|` positive samples from the edge distribution
//! (proportional to fuzzy weight) and pairs every positive with a handful of
//! uniform negative samples. The per-sample generator is keyed by
//! `(seed, epoch, sample)`, so the deterministic mode is bit-stable and the
//! parallel mode sees the same random choices regardless of scheduling (its
//! races only affect coordinate reads).

use rayon::prelude::*;

use crate::embed::curve::KernelParams;
use crate::embed::fuzzy::Edge;
use crate::matrix::Mat;
use crate::rng::CounterRng;

const GRAD_CLIP: f64 = 4.0;

/// Optimizer execution mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimMode {
    /// Single-threaded sweep; bit-identical across runs.
    #[default]
    Deterministic,
    /// Concurrent updates with benign races; seed-dependent but not
    /// bit-stable.
    Parallel,
}

pub struct OptimSettings {
    pub n_epochs: usize,
    pub learning_rate: f64,
    pub negative_samples: usize,
    pub seed: u64,
    pub mode: OptimMode,
}

/// Sampled estimate of the layout cross-entropy at the first and last epoch.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveTrace {
    pub after_first_epoch: f64,
    pub after_last_epoch: f64,
}

/// Runs the epoch loop in place and reports the objective trace.
///
/// Sampling walks directed edges (each undirected edge contributes both
/// orientations) so attraction and repulsion treat the two endpoints
/// symmetrically.
pub fn optimize_layout(
    coords: &mut Mat,
    edges: &[Edge],
    kernel: KernelParams,
    settings: &OptimSettings,
) -> ObjectiveTrace {
    let mut directed = Vec::with_capacity(edges.len() * 2);
    for e in edges {
        directed.push(Edge {
            i: e.i,
            j: e.j,
            weight: e.weight,
        });
        directed.push(Edge {
            i: e.j,
            j: e.i,
            weight: e.weight,
        });
    }
    let alias = AliasTable::new(&directed);
    let mut after_first = f64::NAN;
    for epoch in 0..settings.n_epochs {
        let alpha = settings.learning_rate * (1.0 - epoch as f64 / settings.n_epochs as f64);
        match settings.mode {
            OptimMode::Deterministic => {
                epoch_sweep(coords, &directed, &alias, kernel, settings, epoch, alpha)
            }
            OptimMode::Parallel => {
                epoch_sweep_parallel(coords, &directed, &alias, kernel, settings, epoch, alpha)
            }
        }
        if epoch == 0 {
            after_first = cross_entropy_sample(coords, edges, kernel, settings.seed);
        }
    }
    ObjectiveTrace {
        after_first_epoch: after_first,
        after_last_epoch: cross_entropy_sample(coords, edges, kernel, settings.seed),
    }
}

#[allow(clippy::too_many_arguments)]
fn epoch_sweep(
    coords: &mut Mat,
    edges: &[Edge],
    alias: &AliasTable,
    kernel: KernelParams,
    settings: &OptimSettings,
    epoch: usize,
    alpha: f64,
) {
    let n = coords.rows();
    let dim = coords.cols();
    let data = coords.as_mut_slice();
    for sample in 0..edges.len() {
        let mut rng = CounterRng::from_parts(&[settings.seed, epoch as u64, sample as u64]);
        apply_one_sample(
            data,
            n,
            dim,
            edges,
            alias,
            kernel,
            settings.negative_samples,
            alpha,
            &mut rng,
        );
    }
}

/// Concurrent Hogwild-style sweep. Workers share the coordinate buffer
/// through a raw pointer; colliding updates are the accepted price of the
/// parallel mode.
#[allow(clippy::too_many_arguments)]
fn epoch_sweep_parallel(
    coords: &mut Mat,
    edges: &[Edge],
    alias: &AliasTable,
    kernel: KernelParams,
    settings: &OptimSettings,
    epoch: usize,
    alpha: f64,
) {
    struct SharedCoords(*mut f64, usize);
    unsafe impl Sync for SharedCoords {}

    let n = coords.rows();
    let dim = coords.cols();
    let shared = SharedCoords(coords.as_mut_slice().as_mut_ptr(), n * dim);
    let shared = &shared;

    (0..edges.len()).into_par_iter().for_each(move |sample| {
        let mut rng = CounterRng::from_parts(&[settings.seed, epoch as u64, sample as u64]);
        // SAFETY: every index written is < n * dim; this mode tolerates the
        // resulting write races
        let data = unsafe { std::slice::from_raw_parts_mut(shared.0, shared.1) };
        apply_one_sample(
            data,
            n,
            dim,
            edges,
            alias,
            kernel,
            settings.negative_samples,
            alpha,
            &mut rng,
        );
    });
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn apply_one_sample(
    data: &mut [f64],
    n: usize,
    dim: usize,
    edges: &[Edge],
    alias: &AliasTable,
    kernel: KernelParams,
    negative_samples: usize,
    alpha: f64,
    rng: &mut CounterRng,
) {
    let edge = edges[alias.sample(rng)];
    let (i, j) = (edge.i, edge.j);

    // attraction along the sampled edge, moving both endpoints
    let d2 = sq_dist(data, dim, i, j);
    if d2 > 0.0 {
        let coeff =
            -2.0 * kernel.a * kernel.b * d2.powf(kernel.b - 1.0) / (1.0 + kernel.a * d2.powf(kernel.b));
        // norm clipping keeps saturated steps pointing along the true pair
        // direction instead of snapping to diagonals
        let scale = clip_scale(coeff.abs() * d2.sqrt());
        for c in 0..dim {
            let g = scale * coeff * (data[i * dim + c] - data[j * dim + c]);
            data[i * dim + c] += alpha * g;
            data[j * dim + c] -= alpha * g;
        }
    }

    // uniform repulsors push only the head point; anything but the head
    // itself can be drawn
    for _ in 0..negative_samples {
        let k = rng.next_range(n);
        if k == i {
            continue;
        }
        let d2 = sq_dist(data, dim, i, k);
        if d2 > 0.0 {
            let coeff = 2.0 * kernel.b / ((0.001 + d2) * (1.0 + kernel.a * d2.powf(kernel.b)));
            let scale = clip_scale(coeff * d2.sqrt());
            for c in 0..dim {
                let g = scale * coeff * (data[i * dim + c] - data[k * dim + c]);
                data[i * dim + c] += alpha * g;
            }
        } else {
            // coincident repulsor: nudge along a fixed direction
            data[i * dim] += alpha * GRAD_CLIP;
        }
    }
}

#[inline]
fn sq_dist(data: &[f64], dim: usize, i: usize, j: usize) -> f64 {
    (0..dim)
        .map(|c| {
            let diff = data[i * dim + c] - data[j * dim + c];
            diff * diff
        })
        .sum()
}

/// Rescale factor that caps a gradient vector of the given norm at
/// [`GRAD_CLIP`].
#[inline]
fn clip_scale(norm: f64) -> f64 {
    if norm > GRAD_CLIP {
        GRAD_CLIP / norm
    } else {
        1.0
    }
}

/// Sampled cross-entropy between the fuzzy weights and the layout kernel:
/// the attraction term over every edge plus a fixed pseudo-random batch of
/// repulsion pairs. The pair batch depends only on `seed`, so estimates at
/// different epochs are comparable.
pub fn cross_entropy_sample(coords: &Mat, edges: &[Edge], kernel: KernelParams, seed: u64) -> f64 {
    let n = coords.rows();
    let dim = coords.cols();
    let data = coords.as_slice();
    let clamp_q = |q: f64| q.clamp(1e-12, 1.0 - 1e-12);

    let mut ce = 0.0;
    for e in edges {
        let q = clamp_q(low_dim_q(data, dim, e.i, e.j, kernel));
        ce -= e.weight * q.ln() + (1.0 - e.weight) * (1.0 - q).ln();
    }
    let mut rng = CounterRng::from_parts(&[seed, 0xce0b_5e7e]);
    let n_pairs = edges.len().max(32) * 2;
    for _ in 0..n_pairs {
        let i = rng.next_range(n);
        let j = rng.next_range(n);
        if i == j {
            continue;
        }
        let q = clamp_q(low_dim_q(data, dim, i, j, kernel));
        // random pairs are treated as non-edges (weight ~ 0)
        ce -= (1.0 - q).ln();
    }
    ce
}

#[inline]
fn low_dim_q(data: &[f64], dim: usize, i: usize, j: usize, kernel: KernelParams) -> f64 {
    let d2 = sq_dist(data, dim, i, j);
    1.0 / (1.0 + kernel.a * d2.powf(kernel.b))
}

/// Walker alias table for O(1) weighted edge sampling.
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    fn new(edges: &[Edge]) -> Self {
        let m = edges.len();
        assert!(m > 0, "cannot sample from an empty edge set");
        let total: f64 = edges.iter().map(|e| e.weight).sum();
        let mut prob: Vec<f64> = edges
            .iter()
            .map(|e| e.weight * m as f64 / total)
            .collect();
        let mut alias = vec![0usize; m];

        let mut small: Vec<usize> = Vec::with_capacity(m);
        let mut large: Vec<usize> = Vec::with_capacity(m);
        for (idx, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(idx);
            } else {
                large.push(idx);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s] = l;
            prob[l] = (prob[l] + prob[s]) - 1.0;
            if prob[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for idx in small.into_iter().chain(large) {
            prob[idx] = 1.0;
        }
        AliasTable { prob, alias }
    }

    #[inline]
    fn sample(&self, rng: &mut CounterRng) -> usize {
        let slot = rng.next_range(self.prob.len());
        if rng.next_f64() < self.prob[slot] {
            slot
        } else {
            self.alias[slot]
        }
    }
}

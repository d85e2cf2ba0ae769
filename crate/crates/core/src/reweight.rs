//! Label-driven distance reweighting for the second embedding stage.
//!
//! Within each cluster the distance block is normalized to `[0, 1]` by its
//! own maximum; every cross-cluster entry is replaced by the constant
//! `alpha`, which puts an explicit margin between clusters.

use log::warn;

use crate::data::LabelVector;
use crate::distance::{DistanceMatrix, Metric};
use crate::error::{Error, Result};
use crate::matrix::Mat;

#[derive(Debug, Clone, Copy)]
pub struct ReweightConfig {
    pub alpha: f64,
}

impl Default for ReweightConfig {
    fn default() -> Self {
        ReweightConfig { alpha: 2.0 }
    }
}

impl ReweightConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be a finite value >= 1, got {alpha}"
            )));
        }
        if alpha <= 1.0 {
            // alpha = 1 leaves no margin over normalized intra distances
            warn!("alpha = {alpha} provides no inter-cluster separation margin");
        }
        Ok(ReweightConfig { alpha })
    }
}

/// Builds the reweighted matrix from `d` and cluster labels.
///
/// A block whose maximum is zero (singleton cluster or coincident points)
/// is kept at zero: such points are maximally similar already.
pub fn reweight_distances(
    d: &DistanceMatrix,
    labels: &LabelVector,
    cfg: &ReweightConfig,
) -> Result<DistanceMatrix> {
    let n = d.n();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: n,
        });
    }

    let mut block_max = vec![0.0_f64; labels.n_classes()];
    for i in 0..n {
        for j in (i + 1)..n {
            let (li, lj) = (labels.get(i), labels.get(j));
            if li == lj && d.get(i, j) > block_max[li] {
                block_max[li] = d.get(i, j);
            }
        }
    }

    let mut values = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if labels.get(i) == labels.get(j) {
                let m = block_max[labels.get(i)];
                if m > 0.0 {
                    d.get(i, j) / m
                } else {
                    0.0
                }
            } else {
                cfg.alpha
            };
            values.set(i, j, v);
            values.set(j, i, v);
        }
    }
    DistanceMatrix::new(values, Metric::Precomputed)
}

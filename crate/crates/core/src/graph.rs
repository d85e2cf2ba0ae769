//! Adaptive neighborhood detection and similarity-graph construction.
//!
//! Three steps build the graph from the ordinal matrix: a Gaussian-like
//! kernel with per-pair bandwidths taken from each sample's detected
//! neighborhood scale, an elementwise-min symmetrization that prunes
//! one-sided (typically inter-cluster) affinities, and a two-hop connection
//! boost that strengthens intra-cluster similarity.

use rayon::prelude::*;

use crate::distance::{DistanceMatrix, Metric};
use crate::error::{Error, Result};
use crate::matrix::{IntMat, Mat};
use crate::ordinal::OrdinalMatrix;

/// How the two-hop enhancement interprets the square of the kernel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SecondaryConnection {
    /// Matrix product: accumulates two-hop paths (default).
    #[default]
    Matmul,
    /// Elementwise square, kept as an alternative reading.
    Hadamard,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GraphConfig {
    pub secondary_connection: SecondaryConnection,
}

/// Per-row neighborhood statistics derived from the sorted ordinal values.
///
/// For each sample the `budget` smallest off-diagonal ordinal values are
/// inspected; a jump greater than one rank between consecutive values marks
/// a density gap, and the gap position picks the local neighborhood size.
#[derive(Debug, Clone)]
pub struct NeighborhoodScales {
    budget: usize,
    /// n x budget, each row ascending: the smallest off-diagonal ordinal
    /// values per sample.
    sorted_ordinals: IntMat,
    /// n x (budget - 1): consecutive differences of `sorted_ordinals`.
    gaps: IntMat,
    /// Largest gap per row.
    max_gap: Vec<u32>,
    /// 1-based position of the first occurrence of the largest gap.
    max_gap_index: Vec<usize>,
    /// Chosen local neighborhood size per sample, 1-based into the sorted
    /// row.
    local_size: Vec<usize>,
}

impl NeighborhoodScales {
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn sorted_ordinals(&self) -> &IntMat {
        &self.sorted_ordinals
    }

    pub fn gaps(&self) -> &IntMat {
        &self.gaps
    }

    pub fn max_gap(&self) -> &[u32] {
        &self.max_gap
    }

    pub fn max_gap_index(&self) -> &[usize] {
        &self.max_gap_index
    }

    pub fn local_size(&self) -> &[usize] {
        &self.local_size
    }

    /// Bandwidth for the directed pair `(i, j)`: row `i`'s sorted ordinal
    /// value at sample `j`'s neighborhood size (1-based).
    #[inline]
    pub fn bandwidth(&self, i: usize, j: usize) -> f64 {
        let v = self.sorted_ordinals.get(i, self.local_size[j] - 1);
        // ordinal values between distinct points are >= 1; coincident
        // duplicates can produce 0, where the kernel scale must stay positive
        (v as f64).max(1.0)
    }
}

/// Global neighborhood budget `k = 2 * max(floor(ln(2n / n_c)), 3)`,
/// clamped to `n - 1` so tiny datasets stay valid.
pub fn neighborhood_budget(n: usize, n_clusters: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    if n_clusters < 1 || n_clusters > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {n_clusters} out of range [1, {n}]"
        )));
    }
    let raw = (2.0 * n as f64 / n_clusters as f64).ln().floor() as i64;
    let k = 2 * raw.max(3) as usize;
    Ok(k.min(n - 1))
}

/// Computes the per-sample neighborhood statistics for a budget of `k`.
pub fn local_scales(o: &OrdinalMatrix, k: usize) -> Result<NeighborhoodScales> {
    let n = o.n();
    if k < 1 || k > n - 1 {
        return Err(Error::InvalidArgument(format!(
            "budget {k} out of range [1, {}]",
            n - 1
        )));
    }
    let mut sorted_ordinals = IntMat::zeros(n, k);
    let mut gaps = IntMat::zeros(n, k.saturating_sub(1));
    let mut max_gap = vec![0u32; n];
    let mut max_gap_index = vec![0usize; n];
    let mut local_size = vec![0usize; n];

    // the gap branch floors the size at ceil(k/2) - 1; k is even unless the
    // n-1 clamp was hit
    let half_floor = k.div_ceil(2).saturating_sub(1);

    let mut row_buf: Vec<u32> = Vec::with_capacity(n - 1);
    for i in 0..n {
        row_buf.clear();
        row_buf.extend(
            o.row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v),
        );
        row_buf.sort_unstable();

        let m_row = &row_buf[..k];
        sorted_ordinals.row_mut(i).copy_from_slice(m_row);

        let mut a = 0u32;
        let mut b = 0usize; // 1-based; 0 means "no gaps computed"
        for t in 0..k.saturating_sub(1) {
            let g = m_row[t + 1] - m_row[t];
            gaps.set(i, t, g);
            if g > a {
                a = g;
                b = t + 1;
            }
        }
        max_gap[i] = a;
        max_gap_index[i] = b;

        // a gap of exactly 1 is just consecutive ranks; only jumps >= 2
        // signal a density boundary
        let s = if a > 1 { b.max(half_floor) } else { k - 1 };
        local_size[i] = s.max(1).min(k);
    }

    Ok(NeighborhoodScales {
        budget: k,
        sorted_ordinals,
        gaps,
        max_gap,
        max_gap_index,
        local_size,
    })
}

/// Similarity graph: entries in `[0, 1]`, unit diagonal, exactly symmetric.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    values: Mat,
    /// Threshold used by edge-report diagnostics only.
    pub tau_debug: Option<f64>,
}

impl SimilarityGraph {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }
}

/// Builds the similarity graph from the ordinal matrix and its scales.
pub fn similarity_graph(
    o: &OrdinalMatrix,
    scales: &NeighborhoodScales,
    config: &GraphConfig,
) -> SimilarityGraph {
    let n = o.n();

    // step 1: adaptive Gaussian-like kernel
    let mut kernel = Mat::zeros(n, n);
    kernel
        .as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            for (j, out) in row.iter_mut().enumerate() {
                let r = o.get(i, j) as f64;
                let sigma = scales.bandwidth(i, j);
                let t = r / sigma;
                *out = (-(t * t)).exp();
            }
        });

    // step 2: min-symmetrization keeps only mutually strong affinities
    for i in 0..n {
        for j in (i + 1)..n {
            let v = kernel.get(i, j).min(kernel.get(j, i));
            kernel.set(i, j, v);
            kernel.set(j, i, v);
        }
    }

    // step 3: two-hop connection boost, capped at 1
    let mut values = match config.secondary_connection {
        SecondaryConnection::Matmul => kernel.matmul(&kernel),
        SecondaryConnection::Hadamard => {
            Mat::from_fn(n, n, |i, j| kernel.get(i, j) * kernel.get(i, j))
        }
    };
    for v in values.as_mut_slice() {
        if *v > 1.0 {
            *v = 1.0;
        }
    }
    for i in 0..n {
        values.set(i, i, 1.0);
    }

    SimilarityGraph {
        values,
        tau_debug: None,
    }
}

/// Complement distance fed to the first embedding stage: `1 - S`.
pub fn stage1_distance(s: &SimilarityGraph) -> DistanceMatrix {
    let n = s.n();
    let mut values = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = 1.0 - s.get(i, j);
                // guard rounding: entries of S live in [0, 1]
                values.set(i, j, v.clamp(0.0, 1.0));
            }
        }
    }
    // symmetry is inherited from S but mirror explicitly to keep it exact
    for i in 0..n {
        for j in (i + 1)..n {
            values.set(j, i, values.get(i, j));
        }
    }
    DistanceMatrix::new(values, Metric::Precomputed).expect("complement of a similarity graph")
}

/// One row of the `S > tau` edge report.
#[derive(Debug, Clone)]
pub struct EdgeReportRow {
    pub i: usize,
    pub j: usize,
    pub similarity: f64,
    /// `Some(true)` when both endpoints share a label, `None` without labels.
    pub intra: Option<bool>,
}

/// Lists the upper-triangle pairs whose similarity exceeds `tau`, flagging
/// intra- vs inter-cluster pairs when labels are available.
pub fn edge_report(
    s: &SimilarityGraph,
    tau: f64,
    labels: Option<&crate::data::LabelVector>,
) -> Vec<EdgeReportRow> {
    let mut rows = Vec::new();
    for i in 0..s.n() {
        for j in (i + 1)..s.n() {
            let v = s.get(i, j);
            if v > tau {
                rows.push(EdgeReportRow {
                    i,
                    j,
                    similarity: v,
                    intra: labels.map(|l| l.get(i) == l.get(j)),
                });
            }
        }
    }
    rows
}

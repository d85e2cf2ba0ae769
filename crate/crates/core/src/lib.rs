#![allow(clippy::needless_range_loop)] // index loops mirror the matrix math

//! Adaptive multi-scale manifold embedding.
//!
//! A two-stage nonlinear embedding pipeline for high-dimensional data built
//! around rank-based (ordinal) distances:
//!
//! 1. pairwise distances are replaced by symmetrized ordinal ranks, which
//!    keep their contrast as dimensionality grows;
//! 2. an adaptive similarity graph assigns each sample a neighborhood scale
//!    from gaps in its sorted ranks, prunes one-sided affinities, and
//!    boosts two-hop connections;
//! 3. a neighbor-embedding stage lays out the graph complement, k-means
//!    pseudo-labels drive a distance reweighting, and a second embedding
//!    separates the labeled clusters.
//!
//! The `theory` module provides Monte Carlo validation of the two
//! concentration results the ordinal construction relies on, and
//! `pipeline` wires everything into a reproducible artifact-producing run.

pub mod accuracy;
pub mod cluster;
pub mod data;
pub mod distance;
pub mod embed;
pub mod error;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod ordinal;
pub mod pipeline;
pub mod plot;
pub mod reweight;
pub mod rng;
pub mod theory;

pub use accuracy::accuracy;
pub use cluster::{kmeans, KMeansResult};
pub use data::{DataMatrix, LabelVector};
pub use distance::{compute_distance_matrix, DistanceMatrix, Metric};
pub use embed::{embed, EmbedConfig, Embedding, Stage};
pub use error::{Error, Result};
pub use graph::{
    local_scales, neighborhood_budget, similarity_graph, stage1_distance, NeighborhoodScales,
    SimilarityGraph,
};
pub use matrix::{IntMat, Mat};
pub use ordinal::{ordinal_matrix, ordinal_rank, OrdinalMatrix};
pub use pipeline::{run_pipeline, InputFormat, PipelineArtifacts, PipelineConfig};
pub use reweight::{reweight_distances, ReweightConfig};

//! Neighbor-embedding engine: maps a precomputed distance matrix to a
//! low-dimensional layout.
//!
//! The engine only consumes distance matrices; raw features are converted
//! upstream. Both pipeline stages call it, first on the similarity
//! complement and then on the label-reweighted distances.

pub mod curve;
pub mod eigen;
pub mod fuzzy;
pub mod init;
pub mod optimize;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::matrix::Mat;

pub use curve::{fit_kernel_params, fit_rmse, target_curve, KernelParams};
pub use fuzzy::{build_fuzzy_graph, FuzzyGraph};
pub use init::{classical_mds, procrustes_residual_2d};
pub use optimize::{cross_entropy_sample, ObjectiveTrace, OptimMode};

const INIT_SCALE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMethod {
    /// Classical MDS on the input distances; the precomputed-matrix
    /// counterpart of a PCA start.
    #[default]
    ClassicalMds,
    /// Spectral coordinates of the fuzzy graph.
    Spectral,
    Random,
}

#[derive(Debug, Clone, Copy)]
pub struct EmbedConfig {
    pub k_embed: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_epochs: usize,
    pub learning_rate: f64,
    pub negative_samples: usize,
    pub seed: u64,
    pub init: InitMethod,
    pub optim_mode: OptimMode,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            k_embed: 2,
            n_neighbors: 15,
            min_dist: 0.1,
            n_epochs: 500,
            learning_rate: 1.0,
            negative_samples: 5,
            seed: 0,
            init: InitMethod::default(),
            optim_mode: OptimMode::default(),
        }
    }
}

impl EmbedConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.k_embed < 1 {
            return Err(Error::InvalidArgument("k_embed must be >= 1".into()));
        }
        if self.n_neighbors < 2 || self.n_neighbors >= n {
            return Err(Error::InvalidArgument(format!(
                "n_neighbors must be in [2, n), got {} for n = {n}",
                self.n_neighbors
            )));
        }
        if self.n_epochs < 1 {
            return Err(Error::InvalidArgument("n_epochs must be >= 1".into()));
        }
        if self.min_dist <= 0.0 || !self.min_dist.is_finite() {
            return Err(Error::InvalidArgument("min_dist must be positive".into()));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument(
                "learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which pipeline stage produced an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Stage1,
    Stage2,
}

/// Low-dimensional layout: one point per row, `k_embed` columns.
#[derive(Debug, Clone)]
pub struct Embedding {
    coords: Mat,
    stage: Stage,
}

impl Embedding {
    pub fn from_coords(coords: Mat, stage: Stage) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(
                "embedding contains non-finite coordinates".into(),
            ));
        }
        Ok(Embedding { coords, stage })
    }

    pub fn n(&self) -> usize {
        self.coords.rows()
    }

    pub fn dim(&self) -> usize {
        self.coords.cols()
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn coords(&self) -> &Mat {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.coords.row(i)
    }
}

/// Per-run diagnostics: the fitted kernel and the sampled objective trace.
#[derive(Debug, Clone, Copy)]
pub struct EmbedDiagnostics {
    pub kernel: KernelParams,
    pub objective: ObjectiveTrace,
}

/// Embeds a precomputed distance matrix. Deterministic for a fixed
/// `(input, config)` pair in the default optimizer mode.
pub fn embed(d: &DistanceMatrix, cfg: &EmbedConfig, stage: Stage) -> Result<Embedding> {
    embed_with_diagnostics(d, cfg, stage).map(|(e, _)| e)
}

pub fn embed_with_diagnostics(
    d: &DistanceMatrix,
    cfg: &EmbedConfig,
    stage: Stage,
) -> Result<(Embedding, EmbedDiagnostics)> {
    cfg.validate(d.n())?;

    let graph = build_fuzzy_graph(d, cfg.n_neighbors)?;
    let kernel = fit_kernel_params(cfg.min_dist);

    let mut coords = match cfg.init {
        InitMethod::ClassicalMds => classical_mds(d, cfg.k_embed),
        InitMethod::Spectral => init::spectral_init(&graph, cfg.k_embed),
        InitMethod::Random => init::random_init(d.n(), cfg.k_embed, cfg.seed),
    };
    init::rescale_axes(&mut coords, INIT_SCALE);

    let settings = optimize::OptimSettings {
        n_epochs: cfg.n_epochs,
        learning_rate: cfg.learning_rate,
        negative_samples: cfg.negative_samples,
        seed: cfg.seed,
        mode: cfg.optim_mode,
    };
    let objective = optimize::optimize_layout(&mut coords, graph.edges(), kernel, &settings);

    let embedding = Embedding::from_coords(coords, stage)?;
    Ok((embedding, EmbedDiagnostics { kernel, objective }))
}

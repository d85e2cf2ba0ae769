//! End-to-end orchestration: load, distance, ordinal ranking, adaptive
//! graph, first embedding, pseudo-labeling, reweighting, second embedding,
//! metrics, and artifact persistence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::accuracy::accuracy;
use crate::cluster::kmeans;
use crate::data::LabelVector;
use crate::distance::{compute_distance_matrix, DistanceMatrix, Metric};
use crate::embed::{embed, EmbedConfig, Embedding, Stage};
use crate::error::{Error, Result};
use crate::graph::{
    local_scales, neighborhood_budget, similarity_graph, stage1_distance, GraphConfig,
};
use crate::io;
use crate::matrix::Mat;
use crate::ordinal::ordinal_matrix;
use crate::plot::emit_scatter;
use crate::reweight::{reweight_distances, ReweightConfig};

/// On-disk layout of the pipeline input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Fmat,
    /// A precomputed distance matrix stored as `fmat`.
    Dmat,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    /// CSV orientation fix: input rows are samples instead of features.
    pub transpose: bool,
    pub metric: MetricChoice,
    pub n_clusters: usize,
    pub alpha: f64,
    pub embed_stage1: EmbedSettings,
    pub embed_stage2: EmbedSettings,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub standardize: bool,
    pub truth_labels: Option<PathBuf>,
    pub secondary_connection: SecondaryChoice,
}

/// Serializable metric selector (the distance matrix itself tracks
/// `Precomputed` separately).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricChoice {
    Euclidean,
    Cosine,
}

impl From<MetricChoice> for Metric {
    fn from(m: MetricChoice) -> Metric {
        match m {
            MetricChoice::Euclidean => Metric::Euclidean,
            MetricChoice::Cosine => Metric::Cosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SecondaryChoice {
    #[default]
    Matmul,
    Hadamard,
}

impl From<SecondaryChoice> for GraphConfig {
    fn from(c: SecondaryChoice) -> GraphConfig {
        GraphConfig {
            secondary_connection: match c {
                SecondaryChoice::Matmul => crate::graph::SecondaryConnection::Matmul,
                SecondaryChoice::Hadamard => crate::graph::SecondaryConnection::Hadamard,
            },
        }
    }
}

/// Serializable subset of [`EmbedConfig`]; seeds are injected from the
/// top-level pipeline seed with fixed per-step offsets.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmbedSettings {
    pub k_embed: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_epochs: usize,
    pub learning_rate: f64,
    pub negative_samples: usize,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        let d = EmbedConfig::default();
        EmbedSettings {
            k_embed: d.k_embed,
            n_neighbors: d.n_neighbors,
            min_dist: d.min_dist,
            n_epochs: d.n_epochs,
            learning_rate: d.learning_rate,
            negative_samples: d.negative_samples,
        }
    }
}

impl EmbedSettings {
    fn to_config(self, seed: u64) -> EmbedConfig {
        EmbedConfig {
            k_embed: self.k_embed,
            n_neighbors: self.n_neighbors,
            min_dist: self.min_dist,
            n_epochs: self.n_epochs,
            learning_rate: self.learning_rate,
            negative_samples: self.negative_samples,
            seed,
            ..EmbedConfig::default()
        }
    }
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, format: InputFormat, n_clusters: usize) -> Self {
        PipelineConfig {
            input: input.into(),
            format,
            transpose: false,
            metric: MetricChoice::Euclidean,
            n_clusters,
            alpha: 2.0,
            embed_stage1: EmbedSettings::default(),
            embed_stage2: EmbedSettings::default(),
            seed: 42,
            output_dir: PathBuf::from("."),
            standardize: false,
            truth_labels: None,
            secondary_connection: SecondaryChoice::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_clusters < 1 {
            return Err(Error::InvalidArgument("n_clusters must be >= 1".into()));
        }
        if !self.alpha.is_finite() || self.alpha < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be >= 1, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineMetrics {
    pub acc_stage1: Option<f64>,
    pub acc_stage2: Option<f64>,
    pub n: usize,
    pub n_c: usize,
    pub k_budget: usize,
    pub runtime_seconds: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub struct PipelineArtifacts {
    pub y1: Embedding,
    pub pseudo_labels: LabelVector,
    pub y2: Embedding,
    pub metrics: PipelineMetrics,
    pub provenance: serde_json::Value,
}

fn step<T>(name: &'static str, timer: &mut BTreeMap<String, f64>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| Error::Step {
        step: name,
        source: Box::new(e),
    })?;
    timer.insert(name.to_string(), start.elapsed().as_secs_f64());
    Ok(out)
}

/// Runs the whole pipeline, persisting every artifact into
/// `cfg.output_dir` as soon as its step completes, so a failure still
/// leaves the finished prefix on disk.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineArtifacts> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let out = |name: &str| cfg.output_dir.join(name);
    let mut timer = BTreeMap::new();

    // load + distance
    let distances: DistanceMatrix = match cfg.format {
        InputFormat::Dmat => step("load", &mut timer, || {
            DistanceMatrix::new(io::read_fmat(&cfg.input)?, Metric::Precomputed)
        })?,
        InputFormat::Csv | InputFormat::Fmat => {
            let data = step("load", &mut timer, || {
                let fmt = match cfg.format {
                    InputFormat::Csv => io::DataFormat::Csv,
                    _ => io::DataFormat::Fmat,
                };
                let mut data = io::load_dataset(&cfg.input, fmt, cfg.transpose)?;
                if cfg.standardize {
                    data.standardize();
                }
                Ok(data)
            })?;
            step("distance", &mut timer, || {
                compute_distance_matrix(&data, cfg.metric.into())
            })?
        }
    };
    let n = distances.n();
    if cfg.n_clusters > n {
        return Err(Error::InvalidArgument(format!(
            "n_clusters = {} exceeds sample count {n}",
            cfg.n_clusters
        )));
    }
    io::write_fmat(&out("D.fmat"), distances.values())?;

    // ordinal ranking
    let ordinal = step("ordinal", &mut timer, || Ok(ordinal_matrix(&distances)))?;
    io::write_fmat(&out("O.fmat"), &int_to_mat(ordinal.values()))?;

    // adaptive scales + similarity graph
    let (k_budget, scales) = step("scales", &mut timer, || {
        let k = neighborhood_budget(n, cfg.n_clusters)?;
        Ok((k, local_scales(&ordinal, k)?))
    })?;
    let similarity = step("similarity", &mut timer, || {
        Ok(similarity_graph(
            &ordinal,
            &scales,
            &cfg.secondary_connection.into(),
        ))
    })?;
    io::write_fmat(&out("S.fmat"), similarity.values())?;

    let stage1_d = step("stage1_distance", &mut timer, || {
        Ok(stage1_distance(&similarity))
    })?;
    io::write_fmat(&out("DO.fmat"), stage1_d.values())?;

    // first embedding
    let y1 = step("embed_stage1", &mut timer, || {
        embed(&stage1_d, &cfg.embed_stage1.to_config(cfg.seed), Stage::Stage1)
    })?;
    io::write_coords_csv(&out("Y1.csv"), y1.coords())?;

    // pseudo-labels
    let pseudo_labels = step("kmeans", &mut timer, || {
        Ok(kmeans(y1.coords(), cfg.n_clusters, cfg.seed + 1, 10, 300)?.labels)
    })?;
    io::write_labels(&out("labels.txt"), &pseudo_labels)?;
    if y1.dim() == 2 {
        emit_scatter(&y1, Some(&pseudo_labels), &out("stage1.svg"))?;
    }

    // reweighting of the original distances
    let reweighted = step("reweight", &mut timer, || {
        reweight_distances(&distances, &pseudo_labels, &ReweightConfig::new(cfg.alpha)?)
    })?;
    io::write_fmat(&out("DM.fmat"), reweighted.values())?;

    // second embedding
    let y2 = step("embed_stage2", &mut timer, || {
        embed(
            &reweighted,
            &cfg.embed_stage2.to_config(cfg.seed + 2),
            Stage::Stage2,
        )
    })?;
    io::write_coords_csv(&out("Y2.csv"), y2.coords())?;
    if y2.dim() == 2 {
        emit_scatter(&y2, Some(&pseudo_labels), &out("stage2.svg"))?;
    }

    // metrics against ground truth, when provided
    let (acc_stage1, acc_stage2) = step("metrics", &mut timer, || {
        match &cfg.truth_labels {
            None => Ok((None, None)),
            Some(path) => {
                let truth = io::read_labels(path)?;
                let a1 = accuracy(&pseudo_labels, &truth)?;
                let stage2_labels =
                    kmeans(y2.coords(), cfg.n_clusters, cfg.seed + 3, 10, 300)?.labels;
                let a2 = accuracy(&stage2_labels, &truth)?;
                Ok((Some(a1), Some(a2)))
            }
        }
    })?;

    let metrics = PipelineMetrics {
        acc_stage1,
        acc_stage2,
        n,
        n_c: cfg.n_clusters,
        k_budget,
        runtime_seconds: timer,
    };
    let metrics_json =
        serde_json::to_string_pretty(&metrics).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(out("metrics.json"), metrics_json)
        .map_err(|e| Error::io(out("metrics.json"), e))?;

    let provenance = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
    });
    std::fs::write(
        out("provenance.json"),
        serde_json::to_string_pretty(&provenance).map_err(|e| Error::Format(e.to_string()))?,
    )
    .map_err(|e| Error::io(out("provenance.json"), e))?;

    Ok(PipelineArtifacts {
        y1,
        pseudo_labels,
        y2,
        metrics,
        provenance,
    })
}

fn int_to_mat(m: &crate::matrix::IntMat) -> Mat {
    Mat::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j) as f64)
}

/// Fraction of points whose `k` nearest layout neighbors share the point's
/// label; the separation figure of merit used to compare the two stages.
pub fn knn_label_purity(coords: &Mat, labels: &LabelVector, k: usize) -> f64 {
    let n = coords.rows();
    let mut total = 0.0;
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            let da = sq_dist(coords.row(i), coords.row(a));
            let db = sq_dist(coords.row(i), coords.row(b));
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        });
        let same = order
            .iter()
            .take(k)
            .filter(|&&j| labels.get(j) == labels.get(i))
            .count();
        total += same as f64 / k.min(n - 1) as f64;
    }
    total / n as f64
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Writes a synthetic Gaussian-blob dataset in features-as-rows CSV form;
/// shared by tests and examples.
pub fn write_blob_csv(
    path: &Path,
    dim: usize,
    per_blob: usize,
    centers: &[Vec<f64>],
    spread: f64,
    seed: u64,
) -> Result<LabelVector> {
    use crate::rng::CounterRng;
    let n = per_blob * centers.len();
    let mut rng = CounterRng::from_parts(&[seed, 0xb10b]);
    let mut values = Mat::zeros(dim, n);
    let mut labels = Vec::with_capacity(n);
    for (b, center) in centers.iter().enumerate() {
        for p in 0..per_blob {
            let col = b * per_blob + p;
            labels.push(b);
            for row in 0..dim {
                let c = center.get(row).copied().unwrap_or(0.0);
                values.set(row, col, c + spread * rng.next_normal());
            }
        }
    }
    let mut body = String::new();
    for i in 0..dim {
        let cells: Vec<String> = (0..n).map(|j| format!("{}", values.get(i, j))).collect();
        body.push_str(&cells.join(","));
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
    LabelVector::new(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn small_config(dir: &Path, n_clusters: usize) -> (PipelineConfig, LabelVector) {
        let input = dir.join("blobs.csv");
        let truth = write_blob_csv(
            &input,
            8,
            30,
            &[vec![0.0; 8], vec![8.0; 8]],
            1.0,
            7,
        )
        .unwrap();
        let truth_path = dir.join("truth.txt");
        io::write_labels(&truth_path, &truth).unwrap();

        let mut cfg = PipelineConfig::new(&input, InputFormat::Csv, n_clusters);
        cfg.output_dir = dir.join("out");
        cfg.truth_labels = Some(truth_path);
        cfg.embed_stage1.n_epochs = 150;
        cfg.embed_stage2.n_epochs = 150;
        (cfg, truth)
    }

    #[test]
    fn full_run_writes_all_artifacts() {
        let dir = tempdir().unwrap();
        let (cfg, _) = small_config(dir.path(), 2);
        let artifacts = run_pipeline(&cfg).unwrap();
        for name in [
            "D.fmat",
            "O.fmat",
            "S.fmat",
            "DO.fmat",
            "Y1.csv",
            "labels.txt",
            "DM.fmat",
            "Y2.csv",
            "metrics.json",
            "stage1.svg",
            "stage2.svg",
            "provenance.json",
        ] {
            assert!(cfg.output_dir.join(name).exists(), "{name} missing");
        }
        assert_eq!(artifacts.y1.n(), 60);
        assert_eq!(artifacts.pseudo_labels.len(), 60);
        assert!(artifacts.metrics.acc_stage1.is_some());
        assert!(artifacts.metrics.acc_stage2.unwrap() > 0.9);
    }

    #[test]
    fn single_cluster_degenerate_count_completes() {
        let dir = tempdir().unwrap();
        let (mut cfg, _) = small_config(dir.path(), 1);
        cfg.truth_labels = None;
        let artifacts = run_pipeline(&cfg).unwrap();
        assert!(artifacts.pseudo_labels.as_slice().iter().all(|&l| l == 0));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempdir().unwrap();
        let (mut cfg, _) = small_config(dir.path(), 2);
        cfg.output_dir = dir.path().join("a");
        run_pipeline(&cfg).unwrap();
        let mut cfg2 = cfg.clone();
        cfg2.output_dir = dir.path().join("b");
        run_pipeline(&cfg2).unwrap();
        for name in ["Y1.csv", "labels.txt", "Y2.csv"] {
            let a = std::fs::read(cfg.output_dir.join(name)).unwrap();
            let b = std::fs::read(cfg2.output_dir.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    }

    #[test]
    fn artifacts_reload_with_valid_invariants() {
        let dir = tempdir().unwrap();
        let (cfg, _) = small_config(dir.path(), 2);
        run_pipeline(&cfg).unwrap();

        // every persisted matrix must re-validate its type contract
        for name in ["D.fmat", "DO.fmat", "DM.fmat"] {
            let m = io::read_fmat(&cfg.output_dir.join(name)).unwrap();
            DistanceMatrix::new(m, Metric::Precomputed)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        let s = io::read_fmat(&cfg.output_dir.join("S.fmat")).unwrap();
        assert!(s.is_symmetric());
        assert!(s.iter().all(|v| (0.0..=1.0).contains(&v)));
        let o = io::read_fmat(&cfg.output_dir.join("O.fmat")).unwrap();
        assert!(o.is_symmetric());
        let n = o.rows() as f64;
        assert!(o.iter().all(|v| v.fract() == 0.0 && (0.0..n).contains(&v)));
        for i in 0..o.rows() {
            assert_eq!(o.get(i, i), 0.0);
        }
        let y = io::read_coords_csv(&cfg.output_dir.join("Y1.csv")).unwrap();
        assert!(y.iter().all(f64::is_finite));
        let labels = io::read_labels(&cfg.output_dir.join("labels.txt")).unwrap();
        assert_eq!(labels.len(), 60);
    }

    #[test]
    fn dmat_input_accepted() {
        let dir = tempdir().unwrap();
        let (cfg0, _) = small_config(dir.path(), 2);
        run_pipeline(&cfg0).unwrap();

        // reuse the persisted distance matrix as a fresh precomputed input
        let mut cfg = PipelineConfig::new(
            cfg0.output_dir.join("D.fmat"),
            InputFormat::Dmat,
            2,
        );
        cfg.output_dir = dir.path().join("from_dmat");
        cfg.embed_stage1.n_epochs = 100;
        cfg.embed_stage2.n_epochs = 100;
        let artifacts = run_pipeline(&cfg).unwrap();
        assert_eq!(artifacts.y2.n(), 60);
    }

    #[test]
    fn bad_alpha_rejected_before_any_work() {
        let dir = tempdir().unwrap();
        let (mut cfg, _) = small_config(dir.path(), 2);
        cfg.alpha = 0.2;
        assert!(run_pipeline(&cfg).is_err());
        assert!(!cfg.output_dir.join("D.fmat").exists());
    }

    #[test]
    fn step_attribution_on_failure() {
        let dir = tempdir().unwrap();
        let mut cfg = PipelineConfig::new(dir.path().join("missing.csv"), InputFormat::Csv, 2);
        cfg.output_dir = dir.path().join("out");
        let err = run_pipeline(&cfg).unwrap_err();
        assert_eq!(err.step(), Some("load"));
    }
}

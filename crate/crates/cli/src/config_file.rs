//! Flat key=value run configuration files.
//!
//! Keys mirror the `run` subcommand's long flags (`clusters=4`,
//! `metric=cosine`, `min-dist=0.05`, ...). Lines starting with `#` and
//! blank lines are ignored. Values given on the command line win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use amsme_core::pipeline::{InputFormat, MetricChoice, PipelineConfig, SecondaryChoice};

use crate::{RunArgs, SecondaryArg};

pub fn parse(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    let mut values = BTreeMap::new();
    for (lineno, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            anyhow::bail!(
                "bad config line {} in {}: expected key=value",
                lineno + 1,
                path.display()
            );
        };
        values.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(values)
}

/// Fully resolved run settings after merging config-file values under the
/// command-line flags.
pub struct ResolvedRun {
    pub input: PathBuf,
    pub format: InputFormat,
    pub transpose: bool,
    pub metric: MetricChoice,
    pub cluster_counts: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    pub output: PathBuf,
    pub standardize: bool,
    pub truth: Option<PathBuf>,
    pub neighbors: Option<usize>,
    pub min_dist: Option<f64>,
    pub epochs: Option<usize>,
    pub secondary: SecondaryChoice,
}

impl ResolvedRun {
    pub fn to_pipeline(&self, n_clusters: usize) -> PipelineConfig {
        let mut cfg = PipelineConfig::new(&self.input, self.format, n_clusters);
        cfg.transpose = self.transpose;
        cfg.metric = self.metric;
        cfg.alpha = self.alpha;
        cfg.seed = self.seed;
        cfg.output_dir = self.output.clone();
        cfg.standardize = self.standardize;
        cfg.truth_labels = self.truth.clone();
        cfg.secondary_connection = self.secondary;
        for stage in [&mut cfg.embed_stage1, &mut cfg.embed_stage2] {
            if let Some(n) = self.neighbors {
                stage.n_neighbors = n;
            }
            if let Some(m) = self.min_dist {
                stage.min_dist = m;
            }
            if let Some(e) = self.epochs {
                stage.n_epochs = e;
            }
        }
        cfg
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> anyhow::Result<T> {
    raw.parse()
        .map_err(|_| anyhow::anyhow!("bad value `{raw}` for config key `{key}`"))
}

pub fn merge(args: &RunArgs, file: BTreeMap<String, String>) -> anyhow::Result<ResolvedRun> {
    let get = |key: &str| file.get(key).map(String::as_str);

    let input = match (&args.input, get("in").or(get("input"))) {
        (Some(p), _) => p.clone(),
        (None, Some(v)) => PathBuf::from(v),
        (None, None) => anyhow::bail!("missing input: pass --in or set `in=` in the config file"),
    };

    let format = match (&args.format, get("format")) {
        (Some(f), _) => (*f).into(),
        (None, Some(v)) => match v {
            "csv" => InputFormat::Csv,
            "fmat" => InputFormat::Fmat,
            "dmat" => InputFormat::Dmat,
            other => anyhow::bail!("bad value `{other}` for config key `format`"),
        },
        (None, None) => InputFormat::Csv,
    };

    let metric = match (&args.metric, get("metric")) {
        (Some(m), _) => (*m).into(),
        (None, Some("euclidean")) => MetricChoice::Euclidean,
        (None, Some("cosine")) => MetricChoice::Cosine,
        (None, Some(other)) => anyhow::bail!("bad value `{other}` for config key `metric`"),
        (None, None) => MetricChoice::Euclidean,
    };

    let clusters_raw = match (&args.clusters, get("clusters")) {
        (Some(c), _) => c.clone(),
        (None, Some(v)) => v.to_string(),
        (None, None) => anyhow::bail!("missing cluster count: pass --clusters"),
    };
    let cluster_counts: Vec<usize> = clusters_raw
        .split(',')
        .map(|c| parse_value("clusters", c.trim()))
        .collect::<anyhow::Result<_>>()?;
    if cluster_counts.is_empty() {
        anyhow::bail!("empty cluster list");
    }

    let alpha = match (args.alpha, get("alpha")) {
        (Some(a), _) => a,
        (None, Some(v)) => parse_value("alpha", v)?,
        (None, None) => 2.0,
    };
    let seed = match (args.seed, get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => parse_value("seed", v)?,
        (None, None) => 42,
    };
    let output = match (&args.output, get("out").or(get("output"))) {
        (Some(p), _) => p.clone(),
        (None, Some(v)) => PathBuf::from(v),
        (None, None) => PathBuf::from("amsme-out"),
    };
    let standardize = args.standardize
        || matches!(get("standardize"), Some("true") | Some("1") | Some("yes"));
    let transpose =
        args.transpose || matches!(get("transpose"), Some("true") | Some("1") | Some("yes"));
    let truth = match (&args.truth, get("truth")) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(v)) => Some(PathBuf::from(v)),
        (None, None) => None,
    };

    let neighbors = match (args.neighbors, get("neighbors")) {
        (Some(n), _) => Some(n),
        (None, Some(v)) => Some(parse_value("neighbors", v)?),
        (None, None) => None,
    };
    let min_dist = match (args.min_dist, get("min-dist").or(get("min_dist"))) {
        (Some(m), _) => Some(m),
        (None, Some(v)) => Some(parse_value("min-dist", v)?),
        (None, None) => None,
    };
    let epochs = match (args.epochs, get("epochs")) {
        (Some(e), _) => Some(e),
        (None, Some(v)) => Some(parse_value("epochs", v)?),
        (None, None) => None,
    };
    let secondary = match (&args.secondary, get("secondary")) {
        (Some(SecondaryArg::Matmul), _) => SecondaryChoice::Matmul,
        (Some(SecondaryArg::Hadamard), _) => SecondaryChoice::Hadamard,
        (None, Some("matmul")) => SecondaryChoice::Matmul,
        (None, Some("hadamard")) => SecondaryChoice::Hadamard,
        (None, Some(other)) => anyhow::bail!("bad value `{other}` for config key `secondary`"),
        (None, None) => SecondaryChoice::default(),
    };

    Ok(ResolvedRun {
        input,
        format,
        transpose,
        metric,
        cluster_counts,
        alpha,
        seed,
        output,
        standardize,
        truth,
        neighbors,
        min_dist,
        epochs,
        secondary,
    })
}

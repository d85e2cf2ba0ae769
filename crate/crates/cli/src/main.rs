//! `amsme`: command-line front end for the adaptive multi-scale manifold
//! embedding pipeline and its building blocks.

mod config_file;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use amsme_core::distance::{DistanceMatrix, Metric};
use amsme_core::embed::{embed, EmbedConfig, Stage};
use amsme_core::error::Error;
use amsme_core::graph::{
    edge_report, local_scales, neighborhood_budget, similarity_graph, GraphConfig,
};
use amsme_core::io;
use amsme_core::ordinal::ordinal_matrix;
use amsme_core::pipeline::{run_pipeline, InputFormat, MetricChoice, PipelineConfig};
use amsme_core::plot::{plot_flip_rates, plot_order_sweep};
use amsme_core::theory::{mc_rank_flip_rate, order_probability_sweep, random_flip_config, triple_distances};
use amsme_core::reweight::{reweight_distances, ReweightConfig};
use amsme_core::{accuracy, compute_distance_matrix, kmeans, Mat};

#[derive(Parser)]
#[command(name = "amsme", version, about = "Adaptive multi-scale manifold embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full two-stage pipeline and persist all artifacts.
    Run(RunArgs),
    /// Compute the symmetrized ordinal matrix of a distance matrix.
    Ordinal(OrdinalArgs),
    /// Build the adaptive similarity graph from raw data.
    Graph(GraphArgs),
    /// Embed a precomputed distance matrix.
    Embed(EmbedArgs),
    /// K-means cluster embedding coordinates.
    Cluster(ClusterArgs),
    /// Clustering accuracy of predicted labels against ground truth.
    Acc(AccArgs),
    /// Label-driven reweighting of a distance matrix.
    Reweight(ReweightArgs),
    /// Monte Carlo experiments for the distance-concentration results.
    Theory(TheoryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum FormatArg {
    Csv,
    Fmat,
    Dmat,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => InputFormat::Csv,
            FormatArg::Fmat => InputFormat::Fmat,
            FormatArg::Dmat => InputFormat::Dmat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum MetricArg {
    Euclidean,
    Cosine,
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum SecondaryArg {
    Matmul,
    Hadamard,
}

impl From<MetricArg> for MetricChoice {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => MetricChoice::Euclidean,
            MetricArg::Cosine => MetricChoice::Cosine,
        }
    }
}

#[derive(Args)]
pub(crate) struct RunArgs {
    /// Input data file.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Optional flat key=value config file; command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Input rows are samples rather than features (CSV only).
    #[arg(long)]
    pub transpose: bool,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Cluster count, or a comma-separated sweep like `2,3,4`.
    #[arg(long)]
    pub clusters: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "out")]
    pub output: Option<PathBuf>,
    /// Z-score features before the distance computation.
    #[arg(long)]
    pub standardize: bool,
    /// Ground-truth labels for accuracy reporting.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub neighbors: Option<usize>,
    #[arg(long = "min-dist")]
    pub min_dist: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Two-hop enhancement: matrix product (default) or elementwise square.
    #[arg(long, value_enum)]
    pub secondary: Option<SecondaryArg>,
}

#[derive(Args)]
struct OrdinalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    transpose: bool,
    #[arg(long, value_enum, default_value = "euclidean")]
    metric: MetricArg,
    #[arg(long)]
    clusters: usize,
    #[arg(long = "out")]
    output: PathBuf,
    /// Write pairs with similarity above 0.5 to this CSV.
    #[arg(long = "edge-report")]
    edge_report: Option<PathBuf>,
    /// Labels used to flag edges as intra- or inter-cluster.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Precomputed distance matrix (fmat).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 15)]
    neighbors: usize,
    #[arg(long = "min-dist", default_value_t = 0.1)]
    min_dist: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// Embedding coordinates (CSV, one point per row).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    clusters: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct AccArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct ReweightArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    /// Ordering-failure probability across dimensions.
    Fig2,
    /// Rank-flip rates under Gaussian noise against their bound.
    Thm2,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long = "out")]
    output: PathBuf,
    /// Optional SVG chart of the results.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Exit codes: 2 config error, 3 data error, 4 numerical failure.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    let Some(core) = err.downcast_ref::<Error>() else {
        return 2;
    };
    fn classify(e: &Error) -> u8 {
        match e {
            Error::InvalidArgument(_) => 2,
            Error::Io { .. }
            | Error::Format(_)
            | Error::ZeroNorm(_)
            | Error::LengthMismatch { .. } => 3,
            Error::DegenerateInput(_) | Error::Dimension(_) | Error::PreconditionViolated(_) => 4,
            Error::Step { source, .. } => classify(source),
        }
    }
    classify(core)
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run(args) => run_command(args),
        Command::Ordinal(args) => ordinal_command(args),
        Command::Graph(args) => graph_command(args),
        Command::Embed(args) => embed_command(args),
        Command::Cluster(args) => cluster_command(args),
        Command::Acc(args) => acc_command(args),
        Command::Reweight(args) => reweight_command(args),
        Command::Theory(args) => theory_command(args),
    }
}

fn run_command(args: RunArgs) -> anyhow::Result<()> {
    let file_values = match &args.config {
        Some(path) => config_file::parse(path)?,
        None => BTreeMap::new(),
    };
    let merged = config_file::merge(&args, file_values)?;

    let sweep = merged.cluster_counts.len() > 1;
    for &n_clusters in &merged.cluster_counts {
        let mut cfg: PipelineConfig = merged.to_pipeline(n_clusters);
        if sweep {
            cfg.output_dir = cfg.output_dir.join(format!("nc_{n_clusters}"));
        }
        let artifacts = run_pipeline(&cfg)?;
        println!(
            "n_c = {}: wrote {} (acc_stage1 = {}, acc_stage2 = {})",
            n_clusters,
            cfg.output_dir.display(),
            artifacts
                .metrics
                .acc_stage1
                .map_or("n/a".into(), |a| format!("{a:.4}")),
            artifacts
                .metrics
                .acc_stage2
                .map_or("n/a".into(), |a| format!("{a:.4}")),
        );
    }
    Ok(())
}

fn ordinal_command(args: OrdinalArgs) -> anyhow::Result<()> {
    let d = DistanceMatrix::new(io::read_fmat(&args.input)?, Metric::Precomputed)?;
    let o = ordinal_matrix(&d);
    let as_mat = Mat::from_fn(o.n(), o.n(), |i, j| o.get(i, j) as f64);
    io::write_fmat(&args.output, &as_mat)?;
    println!("wrote {} ({} x {})", args.output.display(), o.n(), o.n());
    Ok(())
}

fn graph_command(args: GraphArgs) -> anyhow::Result<()> {
    let data = match args.format {
        FormatArg::Csv => io::load_dataset(&args.input, io::DataFormat::Csv, args.transpose)?,
        FormatArg::Fmat => io::load_dataset(&args.input, io::DataFormat::Fmat, args.transpose)?,
        FormatArg::Dmat => anyhow::bail!("graph expects raw data; use `ordinal` for matrices"),
    };
    let metric: Metric = match args.metric {
        MetricArg::Euclidean => Metric::Euclidean,
        MetricArg::Cosine => Metric::Cosine,
    };
    let d = compute_distance_matrix(&data, metric)?;
    let o = ordinal_matrix(&d);
    let k = neighborhood_budget(d.n(), args.clusters)?;
    let scales = local_scales(&o, k)?;
    let mut s = similarity_graph(&o, &scales, &GraphConfig::default());
    s.tau_debug = Some(0.5);
    io::write_fmat(&args.output, s.values())?;
    println!("wrote {} (k budget {})", args.output.display(), k);

    if let Some(report_path) = &args.edge_report {
        let labels = args.labels.as_deref().map(io::read_labels).transpose()?;
        let rows = edge_report(&s, s.tau_debug.unwrap(), labels.as_ref());
        let mut body = String::from(if labels.is_some() {
            "i,j,similarity,relation\n"
        } else {
            "i,j,similarity\n"
        });
        for r in &rows {
            match r.intra {
                Some(intra) => body.push_str(&format!(
                    "{},{},{},{}\n",
                    r.i,
                    r.j,
                    r.similarity,
                    if intra { "intra" } else { "inter" }
                )),
                None => body.push_str(&format!("{},{},{}\n", r.i, r.j, r.similarity)),
            }
        }
        std::fs::write(report_path, body)?;
        println!("wrote {} ({} edges)", report_path.display(), rows.len());
    }
    Ok(())
}

fn embed_command(args: EmbedArgs) -> anyhow::Result<()> {
    let d = DistanceMatrix::new(io::read_fmat(&args.input)?, Metric::Precomputed)?;
    let cfg = EmbedConfig {
        k_embed: args.dim,
        n_neighbors: args.neighbors,
        min_dist: args.min_dist,
        n_epochs: args.epochs,
        seed: args.seed,
        ..EmbedConfig::default()
    };
    let y = embed(&d, &cfg, Stage::Stage1)?;
    io::write_coords_csv(&args.output, y.coords())?;
    println!("wrote {} ({} x {})", args.output.display(), y.n(), y.dim());
    Ok(())
}

fn cluster_command(args: ClusterArgs) -> anyhow::Result<()> {
    let coords = io::read_coords_csv(&args.input)?;
    let result = kmeans(&coords, args.clusters, args.seed, 10, 300)?;
    io::write_labels(&args.output, &result.labels)?;
    println!(
        "wrote {} (inertia {:.6}, {} iterations)",
        args.output.display(),
        result.inertia,
        result.iterations_run
    );
    Ok(())
}

fn acc_command(args: AccArgs) -> anyhow::Result<()> {
    let pred = io::read_labels(&args.pred)?;
    let truth = io::read_labels(&args.truth)?;
    let acc = accuracy(&pred, &truth)?;
    let mut distinct: Vec<usize> = pred.as_slice().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    println!(
        "{}",
        serde_json::json!({
            "acc": acc,
            "n": pred.len(),
            "n_clusters": distinct.len(),
        })
    );
    Ok(())
}

fn reweight_command(args: ReweightArgs) -> anyhow::Result<()> {
    let d = DistanceMatrix::new(io::read_fmat(&args.input)?, Metric::Precomputed)?;
    let labels = io::read_labels(&args.labels)?;
    let dm = reweight_distances(&d, &labels, &ReweightConfig::new(args.alpha)?)?;
    io::write_fmat(&args.output, dm.values())?;
    println!("wrote {}", args.output.display());
    Ok(())
}

fn theory_command(args: TheoryArgs) -> anyhow::Result<()> {
    match args.experiment {
        Experiment::Fig2 => {
            let dims = [2, 10, 20, 50, 100, 200, 500, 1000];
            let rows = order_probability_sweep(&dims, 1.0, 1.1, 2000, 10, args.seed)?;
            let mut body = String::from("d,estimate,stderr,cantelli_bound\n");
            for r in &rows {
                body.push_str(&format!(
                    "{},{},{},{}\n",
                    r.d, r.estimate, r.stderr, r.cantelli_bound
                ));
            }
            std::fs::write(&args.output, body)?;
            println!("wrote {}", args.output.display());
            if let Some(plot) = &args.plot {
                plot_order_sweep(&rows, plot)?;
                println!("wrote {}", plot.display());
            }
        }
        Experiment::Thm2 => {
            let mut body =
                String::from("config,d,n,sigma,d_ij,d_ik,flip_rate,chebyshev_bound,stderr\n");
            let mut pairs = Vec::new();
            for (idx, &(d, cfg_seed)) in [
                (5usize, 1u64),
                (5, 2),
                (5, 3),
                (5, 4),
                (50, 5),
                (50, 6),
                (50, 7),
                (50, 8),
            ]
            .iter()
            .enumerate()
            {
                let mut cfg = random_flip_config(d, 10, 0.1, 10_000, cfg_seed)?;
                // aim the leading-order bound at 0.2
                let (dij, dik) = triple_distances(&cfg)?;
                let delta = dik * dik - dij * dij;
                cfg.noise_sigma = (0.2 * delta * delta
                    / (16.0 * d as f64 * (dij * dij + dik * dik)))
                    .sqrt();
                let (rate, bound) = mc_rank_flip_rate(&cfg, args.seed)?;
                let stderr = (rate * (1.0 - rate) / cfg.trials as f64).sqrt();
                body.push_str(&format!(
                    "{idx},{d},10,{},{dij},{dik},{rate},{bound},{stderr}\n",
                    cfg.noise_sigma
                ));
                pairs.push((rate, bound));
            }
            std::fs::write(&args.output, body)?;
            println!("wrote {}", args.output.display());
            if let Some(plot) = &args.plot {
                plot_flip_rates(&pairs, plot)?;
                println!("wrote {}", plot.display());
            }
        }
    }
    Ok(())
}

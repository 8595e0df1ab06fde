use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use vecrank::experiment::{build_experiment_graph, DEFAULT_LAMBDA_GRID};
use vecrank::io::{read_dataset, read_graph, write_dataset, write_graph, write_text};
use vecrank::report::{render_report, results_to_csv};
use vecrank::{
    build_query, emit_plot, generate_clusters, greedy_select, normalize_adjacency, personalized_pagerank,
    rank_with_ppr, run_experiment, sweep_lambda, top_n_candidates, CandidatePool, CompressionConfig,
    EmbeddingVector, ExperimentConfig, HybridConfig, ItemId, LabeledVector, Method, PprConfig, QueryMode,
    ReportFormat, RetrievalResult, ScoredItem, SeedVector, SymbolicMode, SyntheticDatasetSpec,
};

#[derive(Parser)]
#[command(name = "vecrank", version, about = "Diversity-aware reranking of vector search results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic clustered dataset.
    Generate {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select k items from a query's candidate pool with the greedy objective.
    Compress {
        #[command(flatten)]
        input: QueryArgs,
        #[arg(long, default_value_t = 50)]
        pool_size: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        lambda: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build a kNN graph with optional symbolic edges from a dataset file.
    BuildGraph {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Personalized PageRank from a set of seed nodes of a graph file.
    Ppr {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated seed ids, weighted uniformly.
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 0.15, allow_negative_numbers = true)]
        alpha: f64,
        /// Report only the highest-scoring entries.
        #[arg(long)]
        top: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rank a query's pool and its graph neighbours by the blended score.
    Retrieve {
        #[command(flatten)]
        input: QueryArgs,
        /// Graph file; built from the dataset when omitted.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        graph_args: GraphArgs,
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long, default_value_t = 50)]
        pool_size: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the full pipeline on synthetic data and report every method.
    Experiment {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long, default_value_t = 50)]
        pool_size: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        lambda: f64,
        /// Methods to evaluate, comma-separated.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![MethodArg::TopkAnn, MethodArg::SemanticCompression, MethodArg::GraphPpr])]
        methods: Vec<MethodArg>,
        /// Use one member of this cluster as the query instead of a composite.
        #[arg(long)]
        query_cluster: Option<u32>,
        /// Build the graph over the candidate pool only.
        #[arg(long)]
        pool_graph: bool,
        #[command(flatten)]
        output: OutputArgs,
        /// Write an SVG scatter plot (2D data only).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Average compression metrics over seeds for a grid of lambda values.
    SweepLambda {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[arg(long, default_value_t = 50)]
        pool_size: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDA_GRID.to_vec())]
        lambdas: Vec<f64>,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 20)]
        runs: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long, default_value_t = 200)]
    num_points: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    clusters: usize,
    #[arg(long, default_value_t = 0.5)]
    cluster_std: f64,
    #[arg(long, default_value_t = 5.0)]
    separation: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl DatasetArgs {
    fn spec(&self) -> SyntheticDatasetSpec {
        SyntheticDatasetSpec {
            num_points: self.num_points,
            dim: self.dim,
            num_clusters: self.clusters,
            cluster_std: self.cluster_std,
            separation: self.separation,
            rng_seed: self.seed,
            ..SyntheticDatasetSpec::default()
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    data: PathBuf,
    /// Query coordinates, comma-separated; a composite query is drawn otherwise.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    query: Option<Vec<f64>>,
    /// Seed for the composite query draw.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, default_value_t = 5)]
    graph_k: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Sparse)]
    symbolic_mode: ModeArg,
    /// Similarity threshold for dense symbolic edges.
    #[arg(long, default_value_t = 0.85, allow_negative_numbers = true)]
    threshold: f64,
    /// Heads linked to each head by sparse symbolic edges.
    #[arg(long, default_value_t = 2)]
    symbolic_m: usize,
}

#[derive(Args)]
struct RankArgs {
    /// Weight of the graph score; 1 ranks by PageRank alone.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.15, allow_negative_numbers = true)]
    alpha: f64,
    /// Top pool items used as PageRank seeds.
    #[arg(long, default_value_t = 5)]
    seed_count: usize,
    /// Min-max rescale graph scores before blending.
    #[arg(long)]
    rescale_graph: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    None,
    Sparse,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    TopkAnn,
    SemanticCompression,
    GraphPpr,
    Hybrid,
}

impl From<ModeArg> for SymbolicMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::None => SymbolicMode::None,
            ModeArg::Sparse => SymbolicMode::Sparse,
            ModeArg::Dense => SymbolicMode::Dense,
        }
    }
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::TopkAnn => Method::TopkAnn,
            MethodArg::SemanticCompression => Method::SemanticCompression,
            MethodArg::GraphPpr => Method::GraphPpr,
            MethodArg::Hybrid => Method::Hybrid,
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn graph_config(args: &GraphArgs) -> ExperimentConfig {
    ExperimentConfig {
        graph_k: args.graph_k,
        symbolic_mode: args.symbolic_mode.into(),
        symbolic_threshold: args.threshold,
        symbolic_m: args.symbolic_m,
        ..ExperimentConfig::default()
    }
}

fn load_pool(input: &QueryArgs, pool_size: usize) -> Result<(Vec<LabeledVector>, CandidatePool)> {
    let data = read_dataset(&input.data)?;
    let query = match &input.query {
        Some(values) => EmbeddingVector::new(vecrank::synthetic::QUERY_ID, values.clone())?,
        None => build_query(&data, QueryMode::Composite, input.seed)?,
    };
    let corpus: Vec<EmbeddingVector> = data.iter().map(|d| d.vector.clone()).collect();
    let pool = top_n_candidates(&query, &corpus, pool_size).context("building the candidate pool")?;
    Ok((data, pool))
}

fn render_results(results: &[RetrievalResult], format: FormatArg) -> Result<String> {
    Ok(match format {
        FormatArg::Csv => results_to_csv(results),
        FormatArg::Json => serde_json::to_string_pretty(results)? + "\n",
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { dataset, out } => {
            let data = generate_clusters(&dataset.spec())?;
            match out {
                Some(path) => write_dataset(&path, &data)?,
                None => print!("{}", vecrank::io::format_dataset(&data)),
            }
        }
        Command::Compress {
            input,
            pool_size,
            k,
            lambda,
            output,
        } => {
            let (_, pool) = load_pool(&input, pool_size)?;
            let trace = greedy_select(&pool, &CompressionConfig::new(k, lambda)?)?;
            let chosen: Vec<EmbeddingVector> = trace
                .chosen
                .iter()
                .map(|&id| pool.candidates()[pool.position(id).expect("pool member")].clone())
                .collect();
            let items = trace
                .chosen
                .iter()
                .zip(&trace.marginal_gains)
                .map(|(&id, &score)| ScoredItem { id, score })
                .collect();
            let result = RetrievalResult::new(Method::SemanticCompression, items, &chosen, pool.query())?;
            emit(output.out.as_deref(), &render_results(&[result], output.format)?)?;
        }
        Command::BuildGraph { data, graph, out } => {
            let nodes = read_dataset(&data)?;
            let g = build_experiment_graph(&nodes, &graph_config(&graph))?;
            match out {
                Some(path) => write_graph(&path, &g)?,
                None => print!("{}", vecrank::io::format_graph(&g)),
            }
        }
        Command::Ppr {
            graph,
            seeds,
            alpha,
            top,
            output,
        } => {
            let g = read_graph(&graph)?;
            let adj = normalize_adjacency(&g);
            let seeds: Vec<ItemId> = seeds.into_iter().map(ItemId).collect();
            let seed = SeedVector::uniform(adj.order(), &seeds)?;
            let cfg = PprConfig {
                alpha,
                ..PprConfig::default()
            };
            let ppr = personalized_pagerank(&adj, &seed, &cfg)?;
            let mut ranked: Vec<(ItemId, f64)> = ppr.entries().to_vec();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            ranked.truncate(top.unwrap_or(ranked.len()));
            let text = match output.format {
                FormatArg::Csv => {
                    let mut s = String::from("id,score\n");
                    for (id, score) in &ranked {
                        writeln!(s, "{id},{score}")?;
                    }
                    s
                }
                FormatArg::Json => {
                    let entries: Vec<_> = ranked.iter().map(|(id, score)| json!({"id": id, "score": score})).collect();
                    serde_json::to_string_pretty(&json!({
                        "iterations": ppr.iterations,
                        "residual": ppr.residual,
                        "scores": entries,
                    }))? + "\n"
                }
            };
            emit(output.out.as_deref(), &text)?;
        }
        Command::Retrieve {
            input,
            graph,
            graph_args,
            rank,
            pool_size,
            k,
            output,
        } => {
            let (data, pool) = load_pool(&input, pool_size)?;
            let g = match graph {
                Some(path) => read_graph(&path)?,
                None => build_experiment_graph(&data, &graph_config(&graph_args))?,
            };
            let adj = normalize_adjacency(&g);
            let seeds: Vec<ItemId> = pool.ids().take(rank.seed_count).collect();
            let seed = SeedVector::uniform(adj.order(), &seeds)?;
            let ppr_cfg = PprConfig {
                alpha: rank.alpha,
                ..PprConfig::default()
            };
            let ppr = personalized_pagerank(&adj, &seed, &ppr_cfg)?;
            let cfg = HybridConfig {
                rescale_graph: rank.rescale_graph,
                ..HybridConfig::new(rank.beta, k)?
            };
            let result = rank_with_ppr(&pool, &g, &ppr, &cfg)?;
            emit(output.out.as_deref(), &render_results(&[result], output.format)?)?;
        }
        Command::Experiment {
            dataset,
            graph,
            rank,
            pool_size,
            k,
            lambda,
            methods,
            query_cluster,
            pool_graph,
            output,
            plot,
        } => {
            let config = ExperimentConfig {
                dataset: dataset.spec(),
                query: query_cluster.map_or(QueryMode::Composite, QueryMode::SingleCluster),
                query_seed: dataset.seed,
                pool_size,
                k,
                lambda,
                seed_count: rank.seed_count,
                ppr: PprConfig {
                    alpha: rank.alpha,
                    ..PprConfig::default()
                },
                beta: rank.beta,
                rescale_graph: rank.rescale_graph,
                restrict_graph_to_pool: pool_graph,
                methods: methods.into_iter().map(Method::from).collect(),
                ..graph_config(&graph)
            };
            let run = run_experiment(&config)?;
            emit(output.out.as_deref(), &render_report(&run.report, output.format.into())?)?;
            if let Some(path) = plot {
                emit_plot(&run.report, &run.dataset, run.graph.as_ref(), &path)?;
            }
        }
        Command::SweepLambda {
            dataset,
            pool_size,
            k,
            lambdas,
            runs,
            output,
        } => {
            if runs == 0 {
                bail!(vecrank::Error::InvalidParameter("--runs must be at least 1".into()));
            }
            let base = ExperimentConfig {
                dataset: dataset.spec(),
                pool_size,
                k,
                ..ExperimentConfig::default()
            };
            let seeds: Vec<u64> = (dataset.seed..dataset.seed + runs).collect();
            let points = sweep_lambda(&base, &lambdas, &seeds)?;
            let text = match output.format {
                FormatArg::Csv => {
                    let mut s = String::from("lambda,relevance,diversity,coverage\n");
                    for p in &points {
                        writeln!(s, "{},{:.4},{:.4},{:.4}", p.lambda, p.relevance, p.diversity, p.coverage)?;
                    }
                    s
                }
                FormatArg::Json => serde_json::to_string_pretty(&points)? + "\n",
            };
            emit(output.out.as_deref(), &text)?;
        }
    }
    Ok(())
}

/// Invalid parameter values are usage errors; everything else is a runtime failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    let mut cur = err.downcast_ref::<vecrank::Error>();
    while let Some(e) = cur {
        match e {
            vecrank::Error::InvalidParameter(_) => return 1,
            vecrank::Error::Stage { source, .. } => cur = Some(source),
            _ => break,
        }
    }
    2
}

/// Joins the error chain, skipping causes already spelled out by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

//! End-to-end retrieval experiments on synthetic clustered data.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::candidates::{top_n_candidates, CandidatePool};
use crate::compression::{coverage_term, greedy_select, select_topk, CompressionConfig};
use crate::error::{Error, Result};
use crate::geometry::{EmbeddingVector, ItemId};
use crate::graph::{
    add_symbolic_edges_dense, add_symbolic_edges_sparse, build_labeled_knn_graph, elect_cluster_heads,
    normalize_adjacency, personalized_pagerank, ClusterLabel, LabeledVector, PprConfig, SeedVector, SemanticGraph,
};
use crate::hybrid::{rank_with_ppr, HybridConfig, Method, RetrievalResult, ScoredItem};
use crate::synthetic::{build_query, generate_clusters, QueryMode, SyntheticDatasetSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolicMode {
    None,
    Sparse,
    Dense,
}

impl fmt::Display for SymbolicMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolicMode::None => "none",
            SymbolicMode::Sparse => "sparse",
            SymbolicMode::Dense => "dense",
        })
    }
}

impl FromStr for SymbolicMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(SymbolicMode::None),
            "sparse" => Ok(SymbolicMode::Sparse),
            "dense" => Ok(SymbolicMode::Dense),
            other => Err(format!("unknown symbolic mode {other:?} (expected none, sparse or dense)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: SyntheticDatasetSpec,
    pub query: QueryMode,
    pub query_seed: u64,
    pub pool_size: usize,
    pub k: usize,
    pub lambda: f64,
    pub graph_k: usize,
    pub symbolic_mode: SymbolicMode,
    pub symbolic_threshold: f64,
    pub symbolic_m: usize,
    /// Number of top pool items carrying uniform seed weight.
    pub seed_count: usize,
    pub ppr: PprConfig,
    pub beta: f64,
    pub rescale_graph: bool,
    /// Build the graph over the candidate pool only.
    pub restrict_graph_to_pool: bool,
    pub methods: Vec<Method>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: SyntheticDatasetSpec::default(),
            query: QueryMode::Composite,
            query_seed: 42,
            pool_size: 50,
            k: 10,
            lambda: 0.5,
            graph_k: 5,
            symbolic_mode: SymbolicMode::Sparse,
            symbolic_threshold: 0.85,
            symbolic_m: 2,
            seed_count: 5,
            ppr: PprConfig::default(),
            beta: 1.0,
            rescale_graph: false,
            restrict_graph_to_pool: false,
            methods: vec![Method::TopkAnn, Method::SemanticCompression, Method::GraphPpr],
        }
    }
}

impl ExperimentConfig {
    /// Sets both the dataset and query seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.dataset.rng_seed = seed;
        self.query_seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: SymbolicMode) -> Self {
        self.symbolic_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        CompressionConfig::new(self.k, self.lambda)?;
        HybridConfig::new(self.beta, self.k)?;
        self.ppr.validate()?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.pool_size == 0 || self.pool_size > self.dataset.num_points {
            return bad(format!(
                "pool_size must lie in 1..={}, got {}",
                self.dataset.num_points, self.pool_size
            ));
        }
        if self.k > self.pool_size {
            return bad(format!("k ({}) exceeds pool_size ({})", self.k, self.pool_size));
        }
        if self.seed_count == 0 || self.seed_count > self.pool_size {
            return bad(format!("seed_count must lie in 1..={}", self.pool_size));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        Ok(())
    }

    fn needs_graph(&self) -> bool {
        self.methods.iter().any(|m| matches!(m, Method::GraphPpr | Method::Hybrid))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub query: EmbeddingVector,
    pub results: Vec<RetrievalResult>,
    pub runtimes: Vec<StageTiming>,
}

impl ExperimentReport {
    pub fn result(&self, method: Method) -> Option<&RetrievalResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

/// A finished experiment together with the data it ran on.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub dataset: Vec<LabeledVector>,
    pub graph: Option<SemanticGraph>,
}

struct Timer {
    runtimes: Vec<StageTiming>,
}

impl Timer {
    fn stage<T>(&mut self, name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(name))?;
        self.runtimes.push(StageTiming {
            stage: name.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        Ok(out)
    }
}

fn result_for(method: Method, ids: &[ItemId], scores: &[f64], pool: &CandidatePool) -> Result<RetrievalResult> {
    let embeddings: Vec<EmbeddingVector> = ids
        .iter()
        .map(|&id| pool.candidates()[pool.position(id).expect("pool member")].clone())
        .collect();
    let items = ids.iter().zip(scores).map(|(&id, &score)| ScoredItem { id, score }).collect();
    RetrievalResult::new(method, items, &embeddings, pool.query())
}

/// Elects heads per cluster present in `nodes`, whatever the label values.
fn heads_for(nodes: &[LabeledVector]) -> Result<Vec<ItemId>> {
    let mut rank: BTreeMap<ClusterLabel, ClusterLabel> = nodes.iter().map(|n| (n.label, 0)).collect();
    rank.values_mut().enumerate().for_each(|(i, r)| *r = i as ClusterLabel);
    let mut remapped: Vec<LabeledVector> = nodes.to_vec();
    remapped.iter_mut().for_each(|n| n.label = rank[&n.label]);
    elect_cluster_heads(&remapped)
}

/// Builds the kNN graph plus the configured symbolic edges.
pub fn build_experiment_graph(nodes: &[LabeledVector], config: &ExperimentConfig) -> Result<SemanticGraph> {
    let graph = build_labeled_knn_graph(nodes, config.graph_k)?;
    match config.symbolic_mode {
        SymbolicMode::None => Ok(graph),
        SymbolicMode::Sparse => {
            let heads = heads_for(nodes)?;
            if heads.len() < 2 {
                return Ok(graph);
            }
            add_symbolic_edges_sparse(graph, &heads, config.symbolic_m.min(heads.len() - 1))
        }
        SymbolicMode::Dense => {
            let heads = heads_for(nodes)?;
            add_symbolic_edges_dense(graph, &heads, config.symbolic_threshold)
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    config.validate()?;
    let mut timer = Timer { runtimes: Vec::new() };

    let dataset = timer.stage("generate", || generate_clusters(&config.dataset))?;
    let query = timer.stage("query", || build_query(&dataset, config.query, config.query_seed))?;
    let corpus: Vec<EmbeddingVector> = dataset.iter().map(|d| d.vector.clone()).collect();
    let pool = timer.stage("candidates", || top_n_candidates(&query, &corpus, config.pool_size))?;

    let graph = if config.needs_graph() {
        Some(timer.stage("graph", || {
            let nodes: Vec<LabeledVector> = if config.restrict_graph_to_pool {
                dataset.iter().filter(|d| pool.contains(d.vector.id)).cloned().collect()
            } else {
                dataset.clone()
            };
            build_experiment_graph(&nodes, config)
        })?)
    } else {
        None
    };
    let ppr = match &graph {
        Some(g) => Some(timer.stage("ppr", || {
            let adj = normalize_adjacency(g);
            let seeds: Vec<ItemId> = pool.ids().take(config.seed_count).collect();
            let seed = SeedVector::uniform(adj.order(), &seeds)?;
            personalized_pagerank(&adj, &seed, &config.ppr)
        })?),
        None => None,
    };

    let mut results = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let r = match method {
            Method::TopkAnn => timer.stage("topk_ann", || {
                let ids = select_topk(&pool, config.k)?;
                result_for(method, &ids, &pool.query_sims()[..config.k], &pool)
            })?,
            Method::SemanticCompression => timer.stage("semantic_compression", || {
                let trace = greedy_select(&pool, &CompressionConfig::new(config.k, config.lambda)?)?;
                result_for(method, &trace.chosen, &trace.marginal_gains, &pool)
            })?,
            Method::GraphPpr | Method::Hybrid => {
                let name = if method == Method::GraphPpr { "graph_ppr" } else { "hybrid" };
                timer.stage(name, || {
                    let beta = if method == Method::GraphPpr { 1.0 } else { config.beta };
                    let hc = HybridConfig {
                        beta,
                        k: config.k,
                        rescale_graph: config.rescale_graph,
                    };
                    let g = graph.as_ref().expect("graph built for graph methods");
                    let mut r = rank_with_ppr(&pool, g, ppr.as_ref().expect("ppr computed"), &hc)?;
                    r.method = method;
                    Ok(r)
                })?
            }
        };
        results.push(r);
    }

    Ok(ExperimentRun {
        report: ExperimentReport {
            config: config.clone(),
            query,
            results,
            runtimes: timer.runtimes,
        },
        dataset,
        graph,
    })
}

/// Mean metrics of the compression output at one λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub relevance: f64,
    pub diversity: f64,
    /// Coverage term divided by the pool size.
    pub coverage: f64,
}

pub const DEFAULT_LAMBDA_GRID: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];

/// Runs compression at every λ for every seed and averages per λ.
pub fn sweep_lambda(base: &ExperimentConfig, lambdas: &[f64], seeds: &[u64]) -> Result<Vec<SweepPoint>> {
    if lambdas.is_empty() || seeds.is_empty() {
        return Err(Error::Empty("lambda grid and seed list"));
    }
    let mut sums = vec![(0.0, 0.0, 0.0); lambdas.len()];
    for &seed in seeds {
        let cfg = base.clone().with_seed(seed);
        cfg.validate()?;
        let dataset = generate_clusters(&cfg.dataset)?;
        let query = build_query(&dataset, cfg.query, cfg.query_seed)?;
        let corpus: Vec<EmbeddingVector> = dataset.iter().map(|d| d.vector.clone()).collect();
        let pool = top_n_candidates(&query, &corpus, cfg.pool_size)?;
        for (acc, &lambda) in sums.iter_mut().zip(lambdas) {
            let trace = greedy_select(&pool, &CompressionConfig::new(cfg.k, lambda)?)?;
            let r = result_for(Method::SemanticCompression, &trace.chosen, &trace.marginal_gains, &pool)?;
            acc.0 += r.relevance;
            acc.1 += r.diversity.unwrap_or(0.0);
            acc.2 += coverage_term(&pool, &trace.chosen)? / pool.len() as f64;
        }
    }
    let n = seeds.len() as f64;
    Ok(lambdas
        .iter()
        .zip(sums)
        .map(|(&lambda, (r, d, c))| SweepPoint {
            lambda,
            relevance: r / n,
            diversity: d / n,
            coverage: c / n,
        })
        .collect())
}

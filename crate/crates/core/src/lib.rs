//! Diversity-aware reranking of vector search results.
//!
//! A query's nearest neighbours are gathered into a [`CandidatePool`] and then
//! reduced to `k` items, either by greedy maximization of a coverage plus
//! diversity objective ([`greedy_select`]) or by personalized PageRank over a
//! [`SemanticGraph`] of kNN and symbolic edges ([`rank_hybrid`]). The
//! [`experiment`] module wires these stages to synthetic clustered data.
//!
//! ```
//! use vecrank::{greedy_select, top_n_candidates, CompressionConfig, EmbeddingVector};
//!
//! let corpus: Vec<EmbeddingVector> = (0..20u64)
//!     .map(|i| EmbeddingVector::new(i, vec![1.0, i as f64 / 10.0]).unwrap())
//!     .collect();
//! let query = EmbeddingVector::new(99u64, vec![1.0, 0.5]).unwrap();
//! let pool = top_n_candidates(&query, &corpus, 10).unwrap();
//! let trace = greedy_select(&pool, &CompressionConfig::new(3, 0.5).unwrap()).unwrap();
//! assert_eq!(trace.chosen.len(), 3);
//! ```

pub mod candidates;
pub mod compression;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod graph;
pub mod hybrid;
pub mod io;
pub mod plot;
pub mod report;
pub mod synthetic;

pub use candidates::{top_n_candidates, CandidatePool, CandidateSource, ExactScan};
pub use compression::{
    coverage_term, diversity_term, greedy_maximize, greedy_select, objective, select_topk, CompressionConfig,
    SelectionTrace,
};
pub use error::{Error, Result};
pub use experiment::{
    run_experiment, sweep_lambda, ExperimentConfig, ExperimentReport, ExperimentRun, SweepPoint, SymbolicMode,
};
pub use geometry::{
    cosine_similarity, normalize, query_similarities, similarity_matrix, validate_dataset, EmbeddingVector, ItemId,
    SimilarityMatrix,
};
pub use graph::{
    add_symbolic_edges_dense, add_symbolic_edges_sparse, build_knn_graph, build_labeled_knn_graph,
    elect_cluster_heads, normalize_adjacency, personalized_pagerank, random_walk_expand, ClusterLabel, Edge,
    EdgeKind, LabeledVector, NormalizedAdjacency, PprConfig, PprVector, SeedVector, SemanticGraph,
};
pub use hybrid::{
    diversity_metric, graph_score, hybrid_score, rank_hybrid, rank_with_ppr, relevance_metric, vec_score,
    HybridConfig, Method, RetrievalResult, ScoredItem,
};
pub use plot::{emit_plot, render_plot};
pub use report::{export_report, to_csv, ReportFormat};
pub use synthetic::{build_query, composite_query, generate_clusters, QueryMode, SyntheticDatasetSpec};

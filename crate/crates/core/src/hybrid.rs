//! Hybrid vector + graph ranking and the retrieval quality metrics.
//!
//! `R(v | q) = (1 − β)·cos(v, q) + β·r[v]`, where `r` is the personalized
//! PageRank vector. Scores are blended raw unless `rescale_graph` is set,
//! which min-max scales the PageRank component over the scored nodes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::candidates::CandidatePool;
use crate::error::{Error, Result};
use crate::geometry::{cosine_similarity, EmbeddingVector, ItemId};
use crate::graph::{normalize_adjacency, personalized_pagerank, PprConfig, PprVector, SeedVector, SemanticGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub beta: f64,
    pub k: usize,
    #[serde(default)]
    pub rescale_graph: bool,
}

impl HybridConfig {
    pub fn new(beta: f64, k: usize) -> Result<Self> {
        let c = HybridConfig {
            beta,
            k,
            rescale_graph: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TopkAnn,
    SemanticCompression,
    GraphPpr,
    Hybrid,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TopkAnn => "topk_ann",
            Method::SemanticCompression => "semantic_compression",
            Method::GraphPpr => "graph_ppr",
            Method::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub id: ItemId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub method: Method,
    pub items: Vec<ScoredItem>,
    pub relevance: f64,
    /// `None` for single-item results, where pairwise diversity is undefined.
    pub diversity: Option<f64>,
}

impl RetrievalResult {
    /// Computes both metrics from the item embeddings, given in item order.
    pub fn new(
        method: Method,
        items: Vec<ScoredItem>,
        embeddings: &[EmbeddingVector],
        query: &EmbeddingVector,
    ) -> Result<Self> {
        if items.len() != embeddings.len() || items.iter().zip(embeddings).any(|(i, e)| i.id != e.id) {
            return Err(Error::InvalidParameter("embeddings must follow the item order".into()));
        }
        let mut seen = BTreeSet::new();
        for it in &items {
            if !seen.insert(it.id) {
                return Err(Error::DuplicateId(it.id));
            }
        }
        let relevance = relevance_metric(embeddings, query)?;
        let diversity = if embeddings.len() >= 2 {
            Some(diversity_metric(embeddings)?)
        } else {
            None
        };
        Ok(RetrievalResult {
            method,
            items,
            relevance,
            diversity,
        })
    }

    pub fn ids(&self) -> Vec<ItemId> {
        self.items.iter().map(|i| i.id).collect()
    }
}

pub fn vec_score(v: &EmbeddingVector, q: &EmbeddingVector) -> Result<f64> {
    cosine_similarity(v, q)
}

/// PageRank mass at `v`; zero for nodes outside the ranked graph.
pub fn graph_score(ppr: &PprVector, v: ItemId) -> f64 {
    ppr.get(v).unwrap_or(0.0)
}

fn blend(beta: f64, vec: f64, graph: f64) -> f64 {
    (1.0 - beta) * vec + beta * graph
}

pub fn hybrid_score(
    graph: &SemanticGraph,
    v: ItemId,
    q: &EmbeddingVector,
    ppr: &PprVector,
    config: &HybridConfig,
) -> Result<f64> {
    config.validate()?;
    let emb = graph.node(v).ok_or(Error::UnknownId(v))?;
    Ok(blend(config.beta, vec_score(emb, q)?, graph_score(ppr, v)))
}

/// Ranks the pool plus its graph out-neighbors by hybrid score.
///
/// PageRank runs over the whole graph; nodes scored from the pool but absent
/// from the graph get a graph score of zero. Ties go to the lower id.
pub fn rank_hybrid(
    pool: &CandidatePool,
    graph: &SemanticGraph,
    seed: &SeedVector,
    ppr_config: &PprConfig,
    config: &HybridConfig,
) -> Result<RetrievalResult> {
    config.validate()?;
    let adj = normalize_adjacency(graph);
    let ppr = personalized_pagerank(&adj, seed, ppr_config)?;
    rank_with_ppr(pool, graph, &ppr, config)
}

/// [`rank_hybrid`] with a precomputed PageRank vector.
pub fn rank_with_ppr(
    pool: &CandidatePool,
    graph: &SemanticGraph,
    ppr: &PprVector,
    config: &HybridConfig,
) -> Result<RetrievalResult> {
    config.validate()?;
    let query = pool.query();
    let mut scope: Vec<EmbeddingVector> = pool.candidates().to_vec();
    let mut in_scope: BTreeSet<ItemId> = pool.ids().collect();
    for id in pool.ids() {
        if graph.contains(id) {
            for nb in graph.out_neighbors(id) {
                if in_scope.insert(nb) {
                    scope.push(graph.node(nb).expect("edge endpoint").clone());
                }
            }
        }
    }
    if config.k > scope.len() {
        return Err(Error::TooMany {
            what: "ranked items",
            requested: config.k,
            available: scope.len(),
        });
    }

    let vec_scores: Vec<f64> = scope.iter().map(|v| vec_score(v, query)).collect::<Result<_>>()?;
    let mut graph_scores: Vec<f64> = scope.iter().map(|v| graph_score(ppr, v.id)).collect();
    if config.rescale_graph {
        let lo = graph_scores.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = graph_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        graph_scores
            .iter_mut()
            .for_each(|g| *g = if span > 0.0 { (*g - lo) / span } else { 0.0 });
    }

    let mut ranked: Vec<(f64, usize)> = vec_scores
        .iter()
        .zip(&graph_scores)
        .enumerate()
        .map(|(i, (&v, &g))| (blend(config.beta, v, g), i))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(scope[a.1].id.cmp(&scope[b.1].id)));
    ranked.truncate(config.k);

    let method = if config.beta == 1.0 {
        Method::GraphPpr
    } else if config.beta == 0.0 {
        Method::TopkAnn
    } else {
        Method::Hybrid
    };
    let items = ranked.iter().map(|&(s, i)| ScoredItem { id: scope[i].id, score: s }).collect();
    let embeddings: Vec<EmbeddingVector> = ranked.iter().map(|&(_, i)| scope[i].clone()).collect();
    RetrievalResult::new(method, items, &embeddings, query)
}

/// Mean cosine similarity between the items and the query.
pub fn relevance_metric(items: &[EmbeddingVector], q: &EmbeddingVector) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::Empty("retrieved items"));
    }
    let total: f64 = items.iter().map(|v| cosine_similarity(v, q)).sum::<Result<f64>>()?;
    Ok(total / items.len() as f64)
}

/// One minus the mean cosine similarity over unordered item pairs.
pub fn diversity_metric(items: &[EmbeddingVector]) -> Result<f64> {
    if items.len() < 2 {
        return Err(Error::TooMany {
            what: "items for diversity (needs at least 2)",
            requested: 2,
            available: items.len(),
        });
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            total += cosine_similarity(&items[i], &items[j])?;
            pairs += 1;
        }
    }
    Ok(1.0 - total / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::top_n_candidates;
    use crate::compression::select_topk;
    use crate::graph::{build_knn_graph, Edge, EdgeKind};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(id: u64, xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(id, xs.to_vec()).unwrap()
    }

    #[test]
    fn vec_score_examples() {
        assert_abs_diff_eq!(vec_score(&v(0, &[1., 2.]), &v(1, &[1., 2.])).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(vec_score(&v(0, &[1., 0.]), &v(1, &[0., 3.])).unwrap(), 0.0);
    }

    #[test]
    fn graph_score_examples() {
        let g = SemanticGraph::new(vec![v(0, &[1.0, 0.0])]).unwrap();
        let adj = normalize_adjacency(&g);
        let seed = SeedVector::one_hot(adj.order(), ItemId(0)).unwrap();
        let ppr = personalized_pagerank(&adj, &seed, &PprConfig::default()).unwrap();
        assert_eq!(graph_score(&ppr, ItemId(0)), 1.0);
        assert_eq!(graph_score(&ppr, ItemId(42)), 0.0);
    }

    #[test]
    fn graph_score_two_cycle() {
        let g = build_knn_graph(&[v(0, &[1., 0.]), v(1, &[0., 1.])], 1).unwrap();
        let adj = normalize_adjacency(&g);
        let seed = SeedVector::one_hot(adj.order(), ItemId(0)).unwrap();
        let ppr = personalized_pagerank(&adj, &seed, &PprConfig::default()).unwrap();
        assert_abs_diff_eq!(graph_score(&ppr, ItemId(0)), 1.0 / 1.85, epsilon = 1e-10);
        assert_abs_diff_eq!(graph_score(&ppr, ItemId(1)), 0.85 / 1.85, epsilon = 1e-10);
    }

    #[test]
    fn hybrid_score_endpoints() {
        let g = build_knn_graph(&[v(0, &[1., 0.]), v(1, &[1., 1.]), v(2, &[0., 1.])], 1).unwrap();
        let adj = normalize_adjacency(&g);
        let seed = SeedVector::one_hot(adj.order(), ItemId(2)).unwrap();
        let ppr = personalized_pagerank(&adj, &seed, &PprConfig::default()).unwrap();
        let q = v(9, &[1., 0.2]);
        for id in [0, 1, 2].map(ItemId) {
            let vs = vec_score(g.node(id).unwrap(), &q).unwrap();
            let gs = graph_score(&ppr, id);
            let at = |beta| hybrid_score(&g, id, &q, &ppr, &HybridConfig::new(beta, 1).unwrap()).unwrap();
            assert_eq!(at(0.0), vs);
            assert_eq!(at(1.0), gs);
        }
        assert_eq!(blend(0.5, 0.8, 0.2), 0.5);
        assert!(matches!(
            hybrid_score(&g, ItemId(77), &q, &ppr, &HybridConfig::new(0.5, 1).unwrap()),
            Err(Error::UnknownId(_))
        ));
        assert!(HybridConfig::new(1.5, 1).is_err());
        assert!(HybridConfig::new(0.5, 0).is_err());
    }

    #[test]
    fn metric_examples() {
        let q = v(99, &[1., 1.]);
        let same: Vec<_> = (0..4).map(|i| v(i, &[2., 2.])).collect();
        assert_abs_diff_eq!(relevance_metric(&same, &q).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(diversity_metric(&same).unwrap(), 0.0, epsilon = 1e-12);

        let ortho = [v(0, &[1., 0.]), v(1, &[0., 1.])];
        assert_abs_diff_eq!(diversity_metric(&ortho).unwrap(), 1.0, epsilon = 1e-12);

        // cos 0.9 and 0.7 against q = (1, 0).
        let q = v(99, &[1., 0.]);
        let items = [v(0, &[0.9, (1.0f64 - 0.81).sqrt()]), v(1, &[0.7, (1.0f64 - 0.49).sqrt()])];
        assert_abs_diff_eq!(relevance_metric(&items, &q).unwrap(), 0.8, epsilon = 1e-12);

        let basis = [v(0, &[1., 0., 0.]), v(1, &[0., 1., 0.]), v(2, &[0., 0., 1.])];
        assert_abs_diff_eq!(diversity_metric(&basis).unwrap(), 1.0, epsilon = 1e-12);
        let half = [v(0, &[1., 0.]), v(1, &[0.5, 0.75f64.sqrt()]), v(2, &[0.5, -(0.75f64.sqrt())])];
        // Pairwise cosines 0.5, 0.5, -0.5.
        assert_abs_diff_eq!(diversity_metric(&half).unwrap(), 1.0 - 0.5 / 3.0, epsilon = 1e-12);

        assert!(relevance_metric(&[], &q).is_err());
        assert!(diversity_metric(&ortho[..1]).is_err());
    }

    #[test]
    fn equal_pairwise_half() {
        // Pairwise cosines are all 0.5.
        let items = [v(0, &[1., 1., 0.]), v(1, &[1., 0., 1.]), v(2, &[0., 1., 1.])];
        assert_abs_diff_eq!(diversity_metric(&items).unwrap(), 0.5, epsilon = 1e-12);
    }

    fn line_pool() -> (Vec<EmbeddingVector>, CandidatePool) {
        let corpus: Vec<_> = (0..8).map(|i| v(i, &[1.0, i as f64 * 0.25])).collect();
        let pool = top_n_candidates(&v(100, &[1.0, 0.1]), &corpus, 5).unwrap();
        (corpus, pool)
    }

    #[test]
    fn beta_zero_matches_topk() {
        let (corpus, pool) = line_pool();
        let g = build_knn_graph(&corpus, 2).unwrap();
        let adj = normalize_adjacency(&g);
        let seed = SeedVector::uniform(adj.order(), &[ItemId(0)]).unwrap();
        let r = rank_hybrid(&pool, &g, &seed, &PprConfig::default(), &HybridConfig::new(0.0, 3).unwrap()).unwrap();
        let mut got = r.ids();
        got.sort();
        let mut want = select_topk(&pool, 3).unwrap();
        want.sort();
        assert_eq!(got, want);
        assert_eq!(r.method, Method::TopkAnn);
    }

    #[test]
    fn symbolic_neighbor_outside_pool_is_ranked() {
        // Pool {0, 1, 2} near the query; node 3 is far away but every pool
        // node has a heavy symbolic edge to it.
        let corpus = vec![v(0, &[1., 0.]), v(1, &[1., 0.1]), v(2, &[1., 0.2]), v(3, &[0.1, 1.])];
        let pool = top_n_candidates(&v(9, &[1., 0.]), &corpus, 3).unwrap();
        let e = |s, t, w, kind| Edge { source: ItemId(s), target: ItemId(t), weight: w, kind };
        let mut edges = vec![e(0, 1, 1.0, EdgeKind::Knn), e(1, 2, 1.0, EdgeKind::Knn), e(2, 0, 1.0, EdgeKind::Knn)];
        for s in 0..3 {
            edges.push(e(s, 3, 5.0, EdgeKind::Symbolic));
            edges.push(e(3, s, 0.1, EdgeKind::Symbolic));
        }
        let g = SemanticGraph::with_edges(corpus, edges).unwrap();
        let adj = normalize_adjacency(&g);
        let seed = SeedVector::uniform(adj.order(), &[ItemId(0), ItemId(1), ItemId(2)]).unwrap();
        let r = rank_hybrid(&pool, &g, &seed, &PprConfig::default(), &HybridConfig::new(1.0, 3).unwrap()).unwrap();
        assert_eq!(r.method, Method::GraphPpr);
        assert_eq!(r.items[0].id, ItemId(3));
        assert_eq!(r.items.len(), 3);
    }

    #[test]
    fn rescaling_maps_onto_unit_interval() {
        let (corpus, pool) = line_pool();
        let g = build_knn_graph(&corpus, 2).unwrap();
        let adj = normalize_adjacency(&g);
        let seed = SeedVector::one_hot(adj.order(), ItemId(0)).unwrap();
        let cfg = HybridConfig { beta: 1.0, k: 2, rescale_graph: true };
        let r = rank_hybrid(&pool, &g, &seed, &PprConfig::default(), &cfg).unwrap();
        assert_eq!(r.items[0].score, 1.0);
        assert!(r.items.iter().all(|i| (0.0..=1.0).contains(&i.score)));
    }

    #[test]
    fn result_rejects_duplicates() {
        let q = v(9, &[1., 0.]);
        let e = v(0, &[1., 0.]);
        let items = vec![ScoredItem { id: ItemId(0), score: 1.0 }, ScoredItem { id: ItemId(0), score: 1.0 }];
        assert!(RetrievalResult::new(Method::TopkAnn, items, &[e.clone(), e], &q).is_err());
    }

    fn unit_rows(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), n).prop_filter("nonzero", |rows| {
            rows.iter().all(|r| r.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        })
    }

    proptest! {
        #[test]
        fn metrics_are_permutation_invariant_and_bounded(rows in unit_rows(6), rot in 0usize..6) {
            let items: Vec<_> = rows.iter().enumerate().map(|(i, r)| v(i as u64, r)).collect();
            let mut rotated = items.clone();
            rotated.rotate_left(rot);
            let q = v(99, &[0.3, -0.2, 1.0]);
            let d = diversity_metric(&items).unwrap();
            prop_assert!((d - diversity_metric(&rotated).unwrap()).abs() < 1e-12);
            prop_assert!((relevance_metric(&items, &q).unwrap() - relevance_metric(&rotated, &q).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=2.0).contains(&d));
        }

        #[test]
        fn blend_is_monotone(beta in 0.01f64..0.99, a in -1.0f64..1.0, g in 0.0f64..1.0, bump in 1e-6f64..0.5) {
            prop_assert!(blend(beta, a + bump, g) > blend(beta, a, g));
            prop_assert!(blend(beta, a, g + bump) > blend(beta, a, g));
        }
    }
}

//! Semantic graphs over embedded items.
//!
//! A graph holds kNN edges (directed, out-degree `k`) and symbolic edges
//! (stored in both directions). Edge weights are cosine similarities floored
//! at [`WEIGHT_FLOOR`] so every row stays normalizable.

mod ppr;
mod walk;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cosine_similarity, similarity_matrix, validate_dataset, EmbeddingVector, ItemId};

pub use ppr::{personalized_pagerank, PprConfig, PprVector, SeedVector};
pub use walk::random_walk_expand;

pub const WEIGHT_FLOOR: f64 = 1e-9;

pub type ClusterLabel = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledVector {
    pub vector: EmbeddingVector,
    pub label: ClusterLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Knn,
    Symbolic,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Knn => "knn",
            EdgeKind::Symbolic => "symbolic",
        })
    }
}

impl FromStr for EdgeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "knn" => Ok(EdgeKind::Knn),
            "symbolic" => Ok(EdgeKind::Symbolic),
            other => Err(format!("unknown edge kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: ItemId,
    pub target: ItemId,
    pub weight: f64,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone)]
pub struct SemanticGraph {
    nodes: Vec<EmbeddingVector>,
    labels: Option<Vec<ClusterLabel>>,
    index: HashMap<ItemId, usize>,
    edges: Vec<Edge>,
    edge_keys: HashSet<(ItemId, ItemId, EdgeKind)>,
    cluster_heads: Option<Vec<ItemId>>,
}

impl SemanticGraph {
    /// An edgeless graph over validated nodes.
    pub fn new(nodes: Vec<EmbeddingVector>) -> Result<Self> {
        validate_dataset(&nodes)?;
        let index = nodes.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        Ok(SemanticGraph {
            nodes,
            labels: None,
            index,
            edges: Vec::new(),
            edge_keys: HashSet::new(),
            cluster_heads: None,
        })
    }

    pub fn from_labeled(nodes: &[LabeledVector]) -> Result<Self> {
        let mut g = SemanticGraph::new(nodes.iter().map(|n| n.vector.clone()).collect())?;
        g.labels = Some(nodes.iter().map(|n| n.label).collect());
        Ok(g)
    }

    /// A graph with the given edges; every edge is checked against the invariants.
    pub fn with_edges(nodes: Vec<EmbeddingVector>, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut g = SemanticGraph::new(nodes)?;
        for e in edges {
            if !g.insert_edge(e)? {
                return Err(Error::InvalidParameter(format!(
                    "duplicate {} edge {} -> {}",
                    e.kind, e.source, e.target
                )));
            }
        }
        Ok(g)
    }

    pub fn nodes(&self) -> &[EmbeddingVector] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[ClusterLabel]> {
        self.labels.as_deref()
    }

    pub fn cluster_heads(&self) -> Option<&[ItemId]> {
        self.cluster_heads.as_deref()
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn position(&self, id: ItemId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn node(&self, id: ItemId) -> Option<&EmbeddingVector> {
        self.position(id).map(|i| &self.nodes[i])
    }

    pub fn label_of(&self, id: ItemId) -> Option<ClusterLabel> {
        let labels = self.labels.as_ref()?;
        self.position(id).map(|i| labels[i])
    }

    pub fn edge_count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Distinct out-neighbors of `id`, in ascending id order.
    pub fn out_neighbors(&self, id: ItemId) -> Vec<ItemId> {
        let mut out: Vec<ItemId> = self.edges.iter().filter(|e| e.source == id).map(|e| e.target).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Inserts an edge, returning `false` when the `(source, target, kind)`
    /// triple is already present.
    pub fn insert_edge(&mut self, e: Edge) -> Result<bool> {
        for id in [e.source, e.target] {
            if !self.contains(id) {
                return Err(Error::UnknownId(id));
            }
        }
        if e.source == e.target {
            return Err(Error::InvalidParameter(format!("self-loop on {}", e.source)));
        }
        if !(e.weight.is_finite() && e.weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "edge {} -> {} has weight {}; weights must be finite and positive",
                e.source, e.target, e.weight
            )));
        }
        if !self.edge_keys.insert((e.source, e.target, e.kind)) {
            return Ok(false);
        }
        self.edges.push(e);
        Ok(true)
    }

    fn add_symbolic_pair(&mut self, a: ItemId, b: ItemId, weight: f64) -> Result<()> {
        for (s, t) in [(a, b), (b, a)] {
            self.insert_edge(Edge {
                source: s,
                target: t,
                weight,
                kind: EdgeKind::Symbolic,
            })?;
        }
        Ok(())
    }

    fn record_heads(&mut self, heads: &[ItemId]) {
        let mut all = self.cluster_heads.take().unwrap_or_default();
        for &h in heads {
            if !all.contains(&h) {
                all.push(h);
            }
        }
        self.cluster_heads = Some(all);
    }
}

fn floored(sim: f64) -> f64 {
    sim.max(WEIGHT_FLOOR)
}

/// Links every node to its `k` most cosine-similar other nodes.
pub fn build_knn_graph(nodes: &[EmbeddingVector], k: usize) -> Result<SemanticGraph> {
    let graph = SemanticGraph::new(nodes.to_vec())?;
    add_knn_edges(graph, k)
}

/// [`build_knn_graph`] keeping the cluster labels on the nodes.
pub fn build_labeled_knn_graph(nodes: &[LabeledVector], k: usize) -> Result<SemanticGraph> {
    add_knn_edges(SemanticGraph::from_labeled(nodes)?, k)
}

fn add_knn_edges(mut graph: SemanticGraph, k: usize) -> Result<SemanticGraph> {
    let n = graph.len();
    if k == 0 {
        return Err(Error::InvalidParameter("graph k must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::TooMany {
            what: "nearest neighbors",
            requested: k,
            available: n.saturating_sub(1),
        });
    }
    let sims = similarity_matrix(&graph.nodes)?;
    let ids: Vec<ItemId> = graph.nodes.iter().map(|v| v.id).collect();
    let mut others: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        others.clear();
        others.extend((0..n).filter(|&j| j != i));
        let row = sims.row(i);
        others.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(ids[a].cmp(&ids[b])));
        for &j in &others[..k] {
            graph.insert_edge(Edge {
                source: ids[i],
                target: ids[j],
                weight: floored(row[j]),
                kind: EdgeKind::Knn,
            })?;
        }
    }
    Ok(graph)
}

/// One head per cluster: the member most cosine-similar to the cluster mean.
///
/// Labels must be contiguous from 0; a missing label is an empty cluster.
/// Heads are returned in label order.
pub fn elect_cluster_heads(nodes: &[LabeledVector]) -> Result<Vec<ItemId>> {
    if nodes.is_empty() {
        return Err(Error::Empty("labeled node set"));
    }
    let mut members: BTreeMap<ClusterLabel, Vec<&EmbeddingVector>> = BTreeMap::new();
    for n in nodes {
        members.entry(n.label).or_default().push(&n.vector);
    }
    let max_label = *members.keys().next_back().expect("nonempty");
    let mut heads = Vec::with_capacity(members.len());
    for label in 0..=max_label {
        let group = members.get(&label).ok_or(Error::EmptyCluster(label))?;
        let dim = group[0].dim();
        let mut mean = vec![0.0; dim];
        for v in group {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                    id: Some(v.id),
                });
            }
            mean.iter_mut().zip(&v.values).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= group.len() as f64);
        let centroid = EmbeddingVector {
            id: group[0].id,
            values: mean,
        };
        let mut best: Option<(f64, ItemId)> = None;
        for v in group {
            let s = if group.len() == 1 { 1.0 } else { cosine_similarity(v, &centroid)? };
            best = match best {
                Some((bs, bid)) if bs > s || (bs == s && bid < v.id) => Some((bs, bid)),
                _ => Some((s, v.id)),
            };
        }
        heads.push(best.expect("nonempty cluster").1);
    }
    Ok(heads)
}

fn check_heads(graph: &SemanticGraph, heads: &[ItemId]) -> Result<()> {
    if heads.is_empty() {
        return Err(Error::Empty("cluster heads"));
    }
    for &h in heads {
        if !graph.contains(h) {
            return Err(Error::UnknownId(h));
        }
    }
    Ok(())
}

/// Links each head to the `m` heads most cosine-similar to it, in both
/// directions. Re-running adds nothing new.
pub fn add_symbolic_edges_sparse(mut graph: SemanticGraph, heads: &[ItemId], m: usize) -> Result<SemanticGraph> {
    check_heads(&graph, heads)?;
    if m == 0 {
        return Err(Error::InvalidParameter("symbolic m must be at least 1".into()));
    }
    if m >= heads.len() {
        return Err(Error::TooMany {
            what: "linked heads",
            requested: m,
            available: heads.len().saturating_sub(1),
        });
    }
    let head_vecs: Vec<EmbeddingVector> = heads.iter().map(|&h| graph.node(h).expect("checked").clone()).collect();
    let sims = similarity_matrix(&head_vecs)?;
    for i in 0..heads.len() {
        let mut others: Vec<usize> = (0..heads.len()).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| sims.get(i, b).total_cmp(&sims.get(i, a)).then(heads[a].cmp(&heads[b])));
        for &j in &others[..m] {
            graph.add_symbolic_pair(heads[i], heads[j], floored(sims.get(i, j)))?;
        }
    }
    graph.record_heads(heads);
    Ok(graph)
}

/// Links each head to every node of a different cluster whose cosine
/// similarity to the head exceeds `threshold`, in both directions.
pub fn add_symbolic_edges_dense(mut graph: SemanticGraph, heads: &[ItemId], threshold: f64) -> Result<SemanticGraph> {
    check_heads(&graph, heads)?;
    if !(threshold > -1.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (-1, 1), got {threshold}"
        )));
    }
    let labels = graph.labels.clone().ok_or(Error::MissingLabels)?;
    for &h in heads {
        let hi = graph.position(h).expect("checked");
        let head = graph.nodes[hi].clone();
        for vi in 0..graph.len() {
            if labels[vi] == labels[hi] {
                continue;
            }
            let s = cosine_similarity(&head, &graph.nodes[vi])?;
            if s > threshold {
                let v = graph.nodes[vi].id;
                graph.add_symbolic_pair(h, v, floored(s))?;
            }
        }
    }
    graph.record_heads(heads);
    Ok(graph)
}

/// Row-stochastic transition matrix over the graph's nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    order: Vec<ItemId>,
    matrix: Vec<f64>,
    dangling: Vec<bool>,
}

impl NormalizedAdjacency {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[ItemId] {
        &self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.order.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.order.len();
        &self.matrix[i * n..(i + 1) * n]
    }

    pub fn is_dangling(&self, i: usize) -> bool {
        self.dangling[i]
    }

    pub fn dangling(&self) -> Vec<ItemId> {
        self.order
            .iter()
            .zip(&self.dangling)
            .filter(|(_, &d)| d)
            .map(|(&id, _)| id)
            .collect()
    }
}

/// Divides each node's outgoing weights by their sum. Parallel edges of
/// different kinds are summed first; nodes without out-edges are dangling.
pub fn normalize_adjacency(graph: &SemanticGraph) -> NormalizedAdjacency {
    let n = graph.len();
    let mut matrix = vec![0.0; n * n];
    for e in &graph.edges {
        let i = graph.index[&e.source];
        let j = graph.index[&e.target];
        matrix[i * n + j] += e.weight;
    }
    let mut dangling = vec![false; n];
    for i in 0..n {
        let row = &mut matrix[i * n..(i + 1) * n];
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|x| *x /= total);
        } else {
            dangling[i] = true;
        }
    }
    NormalizedAdjacency {
        order: graph.nodes.iter().map(|v| v.id).collect(),
        matrix,
        dangling,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(id: u64, xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(id, xs.to_vec()).unwrap()
    }

    fn lv(id: u64, label: u32, xs: &[f64]) -> LabeledVector {
        LabeledVector {
            vector: v(id, xs),
            label,
        }
    }

    fn targets(g: &SemanticGraph, id: u64, kind: EdgeKind) -> Vec<u64> {
        let mut t: Vec<u64> = g
            .edges()
            .iter()
            .filter(|e| e.source == ItemId(id) && e.kind == kind)
            .map(|e| e.target.0)
            .collect();
        t.sort_unstable();
        t
    }

    #[test]
    fn knn_orthogonal_ties_pick_lowest_id() {
        let g = build_knn_graph(&[v(0, &[1., 0., 0.]), v(1, &[0., 1., 0.]), v(2, &[0., 0., 1.])], 1).unwrap();
        assert_eq!(targets(&g, 0, EdgeKind::Knn), vec![1]);
        assert_eq!(targets(&g, 1, EdgeKind::Knn), vec![0]);
        assert_eq!(targets(&g, 2, EdgeKind::Knn), vec![0]);
        assert!(g.edges().iter().all(|e| e.weight == WEIGHT_FLOOR));
    }

    #[test]
    fn knn_complete_when_k_is_n_minus_one() {
        let nodes: Vec<_> = (0..4).map(|i| v(i, &[1.0 + i as f64, 2.0])).collect();
        let g = build_knn_graph(&nodes, 3).unwrap();
        assert_eq!(g.edges().len(), 12);
        for i in 0..4u64 {
            let want: Vec<u64> = (0..4).filter(|&j| j != i).collect();
            assert_eq!(targets(&g, i, EdgeKind::Knn), want);
        }
        assert!(build_knn_graph(&nodes, 4).is_err());
        assert!(build_knn_graph(&nodes, 0).is_err());
    }

    #[test]
    fn normalize_proportions() {
        let nodes = vec![v(0, &[1., 0.]), v(1, &[0., 1.]), v(2, &[1., 1.]), v(3, &[2., 1.])];
        let edges = [
            Edge { source: ItemId(0), target: ItemId(1), weight: 1.0, kind: EdgeKind::Knn },
            Edge { source: ItemId(0), target: ItemId(2), weight: 3.0, kind: EdgeKind::Knn },
            Edge { source: ItemId(1), target: ItemId(2), weight: 0.5, kind: EdgeKind::Knn },
            Edge { source: ItemId(1), target: ItemId(2), weight: 1.5, kind: EdgeKind::Symbolic },
        ];
        let g = SemanticGraph::with_edges(nodes, edges).unwrap();
        let a = normalize_adjacency(&g);
        assert_eq!(a.get(0, 1), 0.25);
        assert_eq!(a.get(0, 2), 0.75);
        assert_eq!(a.get(1, 2), 1.0);
        assert!(a.is_dangling(2) && a.is_dangling(3));
        assert!(a.row(3).iter().all(|&x| x == 0.0));
        assert_eq!(a.dangling(), vec![ItemId(2), ItemId(3)]);
    }

    #[test]
    fn normalize_symmetric_pair() {
        let g = build_knn_graph(&[v(0, &[1., 0.]), v(1, &[1., 1.])], 1).unwrap();
        let a = normalize_adjacency(&g);
        assert_eq!(a.row(0), &[0.0, 1.0]);
        assert_eq!(a.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn graph_invariants_are_enforced() {
        let nodes = vec![v(0, &[1., 0.]), v(1, &[0., 1.])];
        let e = |s, t, w| Edge { source: ItemId(s), target: ItemId(t), weight: w, kind: EdgeKind::Knn };
        assert!(SemanticGraph::with_edges(nodes.clone(), [e(0, 0, 1.0)]).is_err());
        assert!(SemanticGraph::with_edges(nodes.clone(), [e(0, 5, 1.0)]).is_err());
        assert!(SemanticGraph::with_edges(nodes.clone(), [e(0, 1, 0.0)]).is_err());
        assert!(SemanticGraph::with_edges(nodes.clone(), [e(0, 1, f64::NAN)]).is_err());
        assert!(SemanticGraph::with_edges(nodes.clone(), [e(0, 1, 1.0), e(0, 1, 2.0)]).is_err());
        assert!(SemanticGraph::with_edges(nodes, [e(0, 1, 1.0), e(1, 0, 2.0)]).is_ok());
    }

    #[test]
    fn heads() {
        assert_eq!(elect_cluster_heads(&[lv(4, 0, &[1., 1.])]).unwrap(), vec![ItemId(4)]);
        // Symmetric pair around the mean: equal similarity, lower id wins.
        let pair = [lv(8, 0, &[1., 0.]), lv(3, 0, &[0., 1.])];
        assert_eq!(elect_cluster_heads(&pair).unwrap(), vec![ItemId(3)]);
        let gap = [lv(0, 0, &[1., 0.]), lv(1, 2, &[0., 1.])];
        assert!(matches!(elect_cluster_heads(&gap), Err(Error::EmptyCluster(1))));
        let three = [
            lv(0, 0, &[1., 0.]),
            lv(1, 0, &[1., 0.2]),
            lv(2, 0, &[1., 0.5]),
            lv(3, 1, &[0., 1.]),
        ];
        assert_eq!(elect_cluster_heads(&three).unwrap(), vec![ItemId(1), ItemId(3)]);
    }

    fn four_heads() -> (SemanticGraph, Vec<ItemId>) {
        let nodes = [
            lv(0, 0, &[1., 0.]),
            lv(1, 1, &[0.9, 0.3]),
            lv(2, 2, &[0.2, 1.]),
            lv(3, 3, &[-1., 0.1]),
            lv(4, 0, &[1., 0.05]),
        ];
        (SemanticGraph::from_labeled(&nodes).unwrap(), vec![ItemId(0), ItemId(1), ItemId(2), ItemId(3)])
    }

    #[test]
    fn sparse_two_heads_forced() {
        let (g, _) = four_heads();
        let g = add_symbolic_edges_sparse(g, &[ItemId(0), ItemId(2)], 1).unwrap();
        assert_eq!(g.edge_count(EdgeKind::Symbolic), 2);
        assert_eq!(targets(&g, 0, EdgeKind::Symbolic), vec![2]);
        assert_eq!(targets(&g, 2, EdgeKind::Symbolic), vec![0]);
    }

    #[test]
    fn sparse_links_most_similar_heads_and_is_idempotent() {
        let (g, heads) = four_heads();
        let g = add_symbolic_edges_sparse(g, &heads, 2).unwrap();
        // Head similarity order: 0 -> {1, 2}; 1 -> {0, 2}; 2 -> {1, 0}; 3 -> {2, 1}.
        assert_eq!(targets(&g, 0, EdgeKind::Symbolic), vec![1, 2]);
        assert_eq!(targets(&g, 3, EdgeKind::Symbolic), vec![1, 2]);
        assert_eq!(targets(&g, 1, EdgeKind::Symbolic), vec![0, 2, 3]);
        let before = g.edges().len();
        let g = add_symbolic_edges_sparse(g, &heads, 2).unwrap();
        assert_eq!(g.edges().len(), before);
        assert!(g.edges().iter().all(|e| e.weight >= WEIGHT_FLOOR));
        assert_eq!(g.cluster_heads().unwrap(), heads.as_slice());
    }

    #[test]
    fn sparse_errors() {
        let (g, heads) = four_heads();
        assert!(add_symbolic_edges_sparse(g.clone(), &heads, 4).is_err());
        assert!(add_symbolic_edges_sparse(g.clone(), &[], 1).is_err());
        assert!(add_symbolic_edges_sparse(g, &[ItemId(0), ItemId(99)], 1).is_err());
    }

    #[test]
    fn dense_threshold() {
        let (g, _) = four_heads();
        let heads = [ItemId(0), ItemId(3)];
        let g = add_symbolic_edges_dense(g, &heads, 0.9).unwrap();
        // cos(0, 1) = 0.9487 > 0.9 across clusters; node 4 shares head 0's cluster.
        assert_eq!(targets(&g, 0, EdgeKind::Symbolic), vec![1]);
        assert_eq!(targets(&g, 1, EdgeKind::Symbolic), vec![0]);
        assert_eq!(targets(&g, 3, EdgeKind::Symbolic), Vec::<u64>::new());
        let w = g.edges().iter().find(|e| e.kind == EdgeKind::Symbolic).unwrap().weight;
        assert_abs_diff_eq!(w, 0.9 / 0.9f64.hypot(0.3), epsilon = 1e-12);
    }

    #[test]
    fn dense_requires_labels() {
        let g = SemanticGraph::new(vec![v(0, &[1., 0.]), v(1, &[1., 0.1])]).unwrap();
        assert!(matches!(
            add_symbolic_edges_dense(g, &[ItemId(0)], 0.5),
            Err(Error::MissingLabels)
        ));
        let (g, heads) = four_heads();
        assert!(add_symbolic_edges_dense(g, &heads, 1.0).is_err());
    }
}

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vecrank::{
    add_symbolic_edges_dense, add_symbolic_edges_sparse, build_labeled_knn_graph, elect_cluster_heads,
    generate_clusters, normalize_adjacency, personalized_pagerank, Edge, EdgeKind, EmbeddingVector, ItemId,
    LabeledVector, PprConfig, SeedVector, SemanticGraph, SyntheticDatasetSpec,
};

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, allow_dangling: bool) -> SemanticGraph {
    let nodes = (0..n as u64)
        .map(|i| EmbeddingVector::new(i, vec![1.0, i as f64]).unwrap())
        .collect();
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.random_bool(0.35) {
                edges.push((s, t));
            }
        }
        if n > 1 && !allow_dangling && !edges.iter().any(|&(a, _)| a == s) {
            edges.push((s, (s + 1) % n));
        }
    }
    let edges = edges.into_iter().map(|(s, t)| Edge {
        source: ItemId(s as u64),
        target: ItemId(t as u64),
        weight: rng.random_range(0.05..2.0),
        kind: if rng.random_bool(0.8) { EdgeKind::Knn } else { EdgeKind::Symbolic },
    });
    SemanticGraph::with_edges(nodes, edges).unwrap()
}

/// Solves the PageRank fixed point directly. Dangling mass returns to the seed.
fn dense_solve(graph: &SemanticGraph, seed: &[f64], alpha: f64) -> Vec<f64> {
    let n = graph.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for e in graph.edges() {
        a[(e.source.0 as usize, e.target.0 as usize)] += e.weight;
    }
    let s = DVector::from_column_slice(seed);
    let mut transition = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let row_sum: f64 = a.row(i).sum();
        for j in 0..n {
            // Column i of the transposed transition matrix.
            transition[(j, i)] = if row_sum > 0.0 { a[(i, j)] / row_sum } else { s[j] };
        }
    }
    let m = DMatrix::<f64>::identity(n, n) - transition * (1.0 - alpha);
    let x = m.lu().solve(&(s * alpha)).expect("nonsingular");
    x.iter().copied().collect()
}

#[test]
fn pagerank_matches_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..80 {
        let n = rng.random_range(1..=8);
        let g = random_graph(&mut rng, n, trial % 2 == 0);
        let adj = normalize_adjacency(&g);
        let mut w: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 }).collect();
        w[rng.random_range(0..n)] += 0.5;
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let seed = SeedVector::new(adj.order().to_vec(), w.clone()).unwrap();
        let alpha = rng.random_range(0.05..0.95);
        let cfg = PprConfig {
            alpha,
            ..PprConfig::default()
        };
        let got = personalized_pagerank(&adj, &seed, &cfg).unwrap().scores();
        let want = dense_solve(&g, &w, alpha);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-8, "trial {trial}: {got:?} vs {want:?}");
        }
        assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

fn labeled(points: &[(f64, f64)], labels: &[u32]) -> Vec<LabeledVector> {
    points
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&(x, y), &label))| LabeledVector {
            vector: EmbeddingVector::new(i as u64, vec![x, y]).unwrap(),
            label,
        })
        .collect()
}

#[test]
fn knn_stays_inside_well_separated_clusters() {
    // Two tight angular groups near 0 and 90 degrees.
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for i in 0..6 {
        let t = 0.01 * i as f64;
        pts.push((t.cos(), t.sin()));
        labels.push(0);
        let t = std::f64::consts::FRAC_PI_2 - 0.01 * i as f64;
        pts.push((t.cos(), t.sin()));
        labels.push(1);
    }
    let data = labeled(&pts, &labels);
    let g = build_labeled_knn_graph(&data, 5).unwrap();
    assert_eq!(g.edge_count(EdgeKind::Knn), 12 * 5);
    for e in g.edges() {
        assert_eq!(labels[e.source.0 as usize], labels[e.target.0 as usize]);
    }
}

#[test]
fn knn_targets_match_sorted_scan() {
    let data = generate_clusters(&SyntheticDatasetSpec {
        num_points: 60,
        rng_seed: 8,
        ..Default::default()
    })
    .unwrap();
    let k = 4;
    let g = build_labeled_knn_graph(&data, k).unwrap();
    for d in &data {
        let mut others: Vec<(f64, ItemId)> = data
            .iter()
            .filter(|o| o.vector.id != d.vector.id)
            .map(|o| (cos(&d.vector.values, &o.vector.values), o.vector.id))
            .collect();
        others.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let want: BTreeSet<ItemId> = others[..k].iter().map(|o| o.1).collect();
        let got: BTreeSet<ItemId> = g.out_neighbors(d.vector.id).into_iter().collect();
        assert_eq!(got, want);
    }
}

#[test]
fn heads_match_brute_force() {
    for seed in 0..5 {
        let data = generate_clusters(&SyntheticDatasetSpec::default().with_seed(seed)).unwrap();
        let heads = elect_cluster_heads(&data).unwrap();
        for (label, &head) in heads.iter().enumerate() {
            let members: Vec<&LabeledVector> = data.iter().filter(|d| d.label == label as u32).collect();
            let mut mean = [0.0, 0.0];
            for m in &members {
                mean[0] += m.vector.values[0] / members.len() as f64;
                mean[1] += m.vector.values[1] / members.len() as f64;
            }
            let best = members
                .iter()
                .map(|m| (cos(&m.vector.values, &mean), m.vector.id))
                .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
                .unwrap();
            assert_eq!(head, best.1);
        }
    }
}

#[test]
fn dense_edges_equal_exhaustive_pair_scan() {
    for seed in 0..4 {
        let data = generate_clusters(&SyntheticDatasetSpec::default().with_seed(seed)).unwrap();
        let heads = elect_cluster_heads(&data).unwrap();
        let g = add_symbolic_edges_dense(build_labeled_knn_graph(&data, 5).unwrap(), &heads, 0.85).unwrap();
        let mut want = BTreeSet::new();
        for &h in &heads {
            let hv = &data[h.0 as usize];
            for d in &data {
                if d.label != hv.label && cos(&hv.vector.values, &d.vector.values) > 0.85 {
                    want.insert((h, d.vector.id));
                    want.insert((d.vector.id, h));
                }
            }
        }
        let got: BTreeSet<(ItemId, ItemId)> = g
            .edges()
            .iter()
            .filter(|e| e.kind == EdgeKind::Symbolic)
            .map(|e| (e.source, e.target))
            .collect();
        assert_eq!(got, want);
        assert_eq!(g.edge_count(EdgeKind::Symbolic), want.len());
    }
}

#[test]
fn sparse_edges_link_nearest_heads_both_ways() {
    let data = generate_clusters(&SyntheticDatasetSpec::default()).unwrap();
    let heads = elect_cluster_heads(&data).unwrap();
    let m = 2;
    let g = add_symbolic_edges_sparse(build_labeled_knn_graph(&data, 5).unwrap(), &heads, m).unwrap();
    let mut want = BTreeSet::new();
    for &h in &heads {
        let mut others: Vec<(f64, ItemId)> = heads
            .iter()
            .filter(|&&o| o != h)
            .map(|&o| (cos(&data[h.0 as usize].vector.values, &data[o.0 as usize].vector.values), o))
            .collect();
        others.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, o) in &others[..m] {
            want.insert((h, o));
            want.insert((o, h));
        }
    }
    let got: BTreeSet<(ItemId, ItemId)> = g
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Symbolic)
        .map(|e| (e.source, e.target))
        .collect();
    assert_eq!(got, want);
}

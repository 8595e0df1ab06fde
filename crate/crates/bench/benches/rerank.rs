use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use vecrank::{
    add_symbolic_edges_dense, build_labeled_knn_graph, elect_cluster_heads, greedy_select, normalize_adjacency,
    personalized_pagerank, CompressionConfig, PprConfig, SeedVector,
};
use vecrank_bench::{clustered, random_pool};

fn greedy(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy_select");
    for n in [50, 100, 200] {
        let pool = random_pool(n, 32, 7);
        let cfg = CompressionConfig::new(10, 0.5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &pool, |b, pool| {
            b.iter(|| greedy_select(black_box(pool), &cfg).unwrap())
        });
    }
    group.finish();
}

fn graph(c: &mut Criterion) {
    let data = clustered(200, 42);
    c.bench_function("knn_graph_200", |b| b.iter(|| build_labeled_knn_graph(black_box(&data), 5).unwrap()));

    let heads = elect_cluster_heads(&data).unwrap();
    let g = add_symbolic_edges_dense(build_labeled_knn_graph(&data, 5).unwrap(), &heads, 0.85).unwrap();
    let adj = normalize_adjacency(&g);
    let seeds: Vec<_> = adj.order()[..5].to_vec();
    let seed = SeedVector::uniform(adj.order(), &seeds).unwrap();
    c.bench_function("ppr_200", |b| {
        b.iter(|| personalized_pagerank(black_box(&adj), &seed, &PprConfig::default()).unwrap())
    });
}

criterion_group!(benches, greedy, graph);
criterion_main!(benches);

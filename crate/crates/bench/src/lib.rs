//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vecrank::{
    generate_clusters, top_n_candidates, CandidatePool, EmbeddingVector, LabeledVector, SyntheticDatasetSpec,
};

/// A pool of `n` uniformly random `dim`-dimensional candidates.
pub fn random_pool(n: usize, dim: usize, seed: u64) -> CandidatePool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |id: u64| EmbeddingVector::new(id, (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let query = draw(u64::MAX);
    let corpus: Vec<EmbeddingVector> = (0..n as u64).map(&mut draw).collect();
    top_n_candidates(&query, &corpus, n).unwrap()
}

pub fn clustered(num_points: usize, seed: u64) -> Vec<LabeledVector> {
    generate_clusters(&SyntheticDatasetSpec {
        num_points,
        rng_seed: seed,
        ..SyntheticDatasetSpec::default()
    })
    .unwrap()
}

//! Seeded Gaussian-blob datasets and composite queries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EmbeddingVector, ItemId};
use crate::graph::{ClusterLabel, LabeledVector};

/// Id given to generated query vectors; never used by dataset items.
pub const QUERY_ID: ItemId = ItemId(u64::MAX);

const PLACEMENT_ATTEMPTS: usize = 10_000;
const QUERY_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDatasetSpec {
    pub num_points: usize,
    pub dim: usize,
    pub num_clusters: usize,
    pub cluster_std: f64,
    /// Minimum Euclidean distance between any two centroids.
    pub separation: f64,
    /// Each centroid coordinate is drawn uniformly from this range.
    pub center_range: (f64, f64),
    pub rng_seed: u64,
}

impl Default for SyntheticDatasetSpec {
    fn default() -> Self {
        SyntheticDatasetSpec {
            num_points: 200,
            dim: 2,
            num_clusters: 5,
            cluster_std: 0.5,
            separation: 5.0,
            center_range: (5.0, 25.0),
            rng_seed: 42,
        }
    }
}

impl SyntheticDatasetSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.num_points == 0 || self.dim == 0 || self.num_clusters == 0 {
            return bad("num_points, dim and num_clusters must be positive".into());
        }
        if self.num_clusters > self.num_points {
            return bad(format!(
                "num_clusters ({}) exceeds num_points ({})",
                self.num_clusters, self.num_points
            ));
        }
        if !(self.cluster_std > 0.0 && self.cluster_std.is_finite()) {
            return bad(format!("cluster_std must be positive, got {}", self.cluster_std));
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return bad(format!("separation must be positive, got {}", self.separation));
        }
        let (lo, hi) = self.center_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("center_range must be an increasing finite pair, got ({lo}, {hi})"));
        }
        Ok(())
    }
}

/// Isotropic Gaussian clusters around separated random centroids.
///
/// Item ids run from 0 and clusters occupy contiguous id blocks; the first
/// `num_points % num_clusters` clusters get one extra point.
pub fn generate_clusters(spec: &SyntheticDatasetSpec) -> Result<Vec<LabeledVector>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (lo, hi) = spec.center_range;

    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(spec.num_clusters);
    let mut attempts = 0;
    while centroids.len() < spec.num_clusters {
        if attempts == PLACEMENT_ATTEMPTS * spec.num_clusters {
            return Err(Error::CentroidPlacement {
                placed: centroids.len(),
                requested: spec.num_clusters,
                separation: spec.separation,
            });
        }
        attempts += 1;
        let c: Vec<f64> = (0..spec.dim).map(|_| rng.random_range(lo..hi)).collect();
        let far_enough = centroids.iter().all(|o| {
            let d2: f64 = o.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= spec.separation
        });
        if far_enough {
            centroids.push(c);
        }
    }

    let noise = Normal::new(0.0, spec.cluster_std).expect("validated std");
    let base = spec.num_points / spec.num_clusters;
    let extra = spec.num_points % spec.num_clusters;
    let mut out = Vec::with_capacity(spec.num_points);
    for (label, centroid) in centroids.iter().enumerate() {
        let size = base + usize::from(label < extra);
        for _ in 0..size {
            let values = loop {
                let p: Vec<f64> = centroid.iter().map(|&m| m + noise.sample(&mut rng)).collect();
                if p.iter().any(|&x| x != 0.0) {
                    break p;
                }
            };
            out.push(LabeledVector {
                vector: EmbeddingVector {
                    id: ItemId(out.len() as u64),
                    values,
                },
                label: label as ClusterLabel,
            });
        }
    }
    Ok(out)
}

/// How the experiment query is built from a labeled dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    /// Mean of one random member from every cluster.
    Composite,
    /// One random member of the given cluster.
    SingleCluster(ClusterLabel),
}

fn members_by_label(dataset: &[LabeledVector]) -> Result<Vec<Vec<&EmbeddingVector>>> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let max = dataset.iter().map(|d| d.label).max().expect("nonempty") as usize;
    let mut groups = vec![Vec::new(); max + 1];
    for d in dataset {
        groups[d.label as usize].push(&d.vector);
    }
    if let Some(empty) = groups.iter().position(|g| g.is_empty()) {
        return Err(Error::EmptyCluster(empty as ClusterLabel));
    }
    Ok(groups)
}

pub fn composite_query(dataset: &[LabeledVector], rng_seed: u64) -> Result<EmbeddingVector> {
    let groups = members_by_label(dataset)?;
    let dim = groups[0][0].dim();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..QUERY_ATTEMPTS {
        let mut mean = vec![0.0; dim];
        for g in &groups {
            let pick = g[rng.random_range(0..g.len())];
            if pick.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: pick.dim(),
                    id: Some(pick.id),
                });
            }
            mean.iter_mut().zip(&pick.values).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= groups.len() as f64);
        if mean.iter().any(|&x| x != 0.0) {
            return Ok(EmbeddingVector {
                id: QUERY_ID,
                values: mean,
            });
        }
    }
    Err(Error::DegenerateQuery(QUERY_ATTEMPTS))
}

pub fn single_cluster_query(dataset: &[LabeledVector], label: ClusterLabel, rng_seed: u64) -> Result<EmbeddingVector> {
    let groups = members_by_label(dataset)?;
    let g = groups.get(label as usize).ok_or(Error::EmptyCluster(label))?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let pick = g[rng.random_range(0..g.len())];
    Ok(EmbeddingVector {
        id: QUERY_ID,
        values: pick.values.clone(),
    })
}

pub fn build_query(dataset: &[LabeledVector], mode: QueryMode, rng_seed: u64) -> Result<EmbeddingVector> {
    match mode {
        QueryMode::Composite => composite_query(dataset, rng_seed),
        QueryMode::SingleCluster(label) => single_cluster_query(dataset, label, rng_seed),
    }
}

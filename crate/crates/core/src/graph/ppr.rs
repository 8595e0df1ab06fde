//! Personalized PageRank by power iteration.
//!
//! Iterates `r ← α·s + (1−α)·Aᵀr` over a row-stochastic `A`. Mass that
//! reaches a dangling node is handed back to the seed distribution, so `r`
//! stays a probability vector.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::NormalizedAdjacency;
use crate::error::{Error, Result};
use crate::geometry::ItemId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PprConfig {
    /// Teleport weight on the seed distribution.
    pub alpha: f64,
    /// L1 change between iterates at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PprConfig {
    fn default() -> Self {
        PprConfig {
            alpha: 0.15,
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl PprConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// A probability distribution over graph nodes used as the restart target.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedVector {
    order: Vec<ItemId>,
    weights: Vec<f64>,
}

impl SeedVector {
    pub fn new(order: Vec<ItemId>, weights: Vec<f64>) -> Result<Self> {
        if order.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: order.len(),
                found: weights.len(),
                id: None,
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("seed weights must be finite and nonnegative".into()));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::InvalidParameter("seed needs at least one positive weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("seed weights sum to {total}, not 1")));
        }
        Ok(SeedVector { order, weights })
    }

    /// Uniform weight over `seeds`, zero elsewhere.
    pub fn uniform(order: &[ItemId], seeds: &[ItemId]) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::Empty("seed set"));
        }
        let pos: HashMap<ItemId, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut weights = vec![0.0; order.len()];
        let mut distinct = 0usize;
        for &s in seeds {
            let i = *pos.get(&s).ok_or(Error::UnknownId(s))?;
            if weights[i] == 0.0 {
                weights[i] = 1.0;
                distinct += 1;
            }
        }
        let w = 1.0 / distinct as f64;
        weights.iter_mut().for_each(|x| *x *= w);
        SeedVector::new(order.to_vec(), weights)
    }

    pub fn one_hot(order: &[ItemId], seed: ItemId) -> Result<Self> {
        SeedVector::uniform(order, &[seed])
    }

    pub fn order(&self) -> &[ItemId] {
        &self.order
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Converged PageRank scores in adjacency order.
#[derive(Debug, Clone, PartialEq)]
pub struct PprVector {
    entries: Vec<(ItemId, f64)>,
    index: HashMap<ItemId, usize>,
    pub iterations: usize,
    /// L1 distance between the last two iterates.
    pub residual: f64,
}

impl PprVector {
    pub fn entries(&self) -> &[(ItemId, f64)] {
        &self.entries
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn get(&self, id: ItemId) -> Option<f64> {
        self.index.get(&id).map(|&i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn personalized_pagerank(adj: &NormalizedAdjacency, seed: &SeedVector, config: &PprConfig) -> Result<PprVector> {
    config.validate()?;
    if seed.order() != adj.order() {
        return Err(Error::InvalidParameter("seed order does not match adjacency order".into()));
    }
    let n = adj.len();
    let s = seed.weights();
    let alpha = config.alpha;
    let mut r = s.to_vec();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;

    for it in 1..=config.max_iterations {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut dangling_mass = 0.0;
        for (i, &ri) in r.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            if adj.is_dangling(i) {
                dangling_mass += ri;
                continue;
            }
            for (x, &a) in next.iter_mut().zip(adj.row(i)) {
                *x += ri * a;
            }
        }
        for (x, &sj) in next.iter_mut().zip(s) {
            *x = alpha * sj + (1.0 - alpha) * (*x + dangling_mass * sj);
        }
        residual = r.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut r, &mut next);
        if residual < config.tolerance {
            let entries: Vec<(ItemId, f64)> = adj.order().iter().copied().zip(r).collect();
            let index = entries.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
            return Ok(PprVector {
                entries,
                index,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: config.max_iterations,
        residual,
    })
}

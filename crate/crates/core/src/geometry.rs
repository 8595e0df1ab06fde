//! Vector primitives and cosine similarity.
//!
//! Every similarity in the crate goes through [`cosine_similarity`]. Zero-norm
//! vectors are rejected instead of being mapped to a similarity of zero.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque item identifier. Ordering is used for every tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u64);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for ItemId {
    fn from(v: u64) -> Self {
        ItemId(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub id: ItemId,
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    /// Builds a vector, checking that it is nonempty and finite.
    pub fn new(id: impl Into<ItemId>, values: Vec<f64>) -> Result<Self> {
        let v = EmbeddingVector {
            id: id.into(),
            values,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::EmptyVector { id: self.id });
        }
        if self.values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { id: self.id });
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nonzero_norm(v: &EmbeddingVector) -> Result<f64> {
    let n = v.norm();
    if n > 0.0 && n.is_finite() {
        Ok(n)
    } else if n.is_finite() {
        Err(Error::ZeroNorm { id: v.id })
    } else {
        Err(Error::NonFinite { id: v.id })
    }
}

/// `a·b / (‖a‖‖b‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
            id: Some(b.id),
        });
    }
    let na = nonzero_norm(a)?;
    let nb = nonzero_norm(b)?;
    Ok((dot(&a.values, &b.values) / (na * nb)).clamp(-1.0, 1.0))
}

pub fn normalize(v: &EmbeddingVector) -> Result<EmbeddingVector> {
    let n = nonzero_norm(v)?;
    Ok(EmbeddingVector {
        id: v.id,
        values: v.values.iter().map(|x| x / n).collect(),
    })
}

/// Checks the dataset-level invariants: nonempty, one shared dimension,
/// finite coordinates, nonzero norms and unique ids.
pub fn validate_dataset(vectors: &[EmbeddingVector]) -> Result<usize> {
    let first = vectors.first().ok_or(Error::Empty("vector set"))?;
    let dim = first.dim();
    let mut seen = HashSet::with_capacity(vectors.len());
    for v in vectors {
        v.validate()?;
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
                id: Some(v.id),
            });
        }
        nonzero_norm(v)?;
        if !seen.insert(v.id) {
            return Err(Error::DuplicateId(v.id));
        }
    }
    Ok(dim)
}

/// Dense pairwise cosine similarities in a fixed item order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    order: Vec<ItemId>,
    entries: Vec<f64>,
}

impl SimilarityMatrix {
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
        self.entries[i * self.order.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.order.len();
        &self.entries[i * n..(i + 1) * n]
    }
}

/// Builds `S = V Vᵀ` over the row-normalized vectors.
///
/// The matrix is filled from the upper triangle so symmetry is exact and the
/// diagonal is set to 1.
pub fn similarity_matrix(vectors: &[EmbeddingVector]) -> Result<SimilarityMatrix> {
    if vectors.is_empty() {
        return Err(Error::Empty("vector set"));
    }
    let unit: Vec<EmbeddingVector> = vectors.iter().map(normalize).collect::<Result<_>>()?;
    let dim = unit[0].dim();
    if let Some(v) = unit.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
            id: Some(v.id),
        });
    }
    let n = unit.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let s = dot(&unit[i].values, &unit[j].values).clamp(-1.0, 1.0);
            entries[i * n + j] = s;
            entries[j * n + i] = s;
        }
    }
    Ok(SimilarityMatrix {
        order: vectors.iter().map(|v| v.id).collect(),
        entries,
    })
}

pub fn query_similarities(query: &EmbeddingVector, vectors: &[EmbeddingVector]) -> Result<Vec<f64>> {
    vectors.iter().map(|v| cosine_similarity(query, v)).collect()
}

//! First-stage candidate generation.
//!
//! [`ExactScan`] is a brute-force stand-in for an ANN index. Anything that can
//! produce the `n` most cosine-similar corpus items can implement
//! [`CandidateSource`] and feed the rerankers.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{query_similarities, similarity_matrix, EmbeddingVector, ItemId, SimilarityMatrix};

/// Candidates around a query, sorted by query similarity (descending, ties by
/// ascending id), with their pairwise similarity matrix.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    query: EmbeddingVector,
    candidates: Vec<EmbeddingVector>,
    query_sims: Vec<f64>,
    pairwise: SimilarityMatrix,
    index: HashMap<ItemId, usize>,
}

impl CandidatePool {
    /// Builds a pool from an arbitrary candidate list, sorting it into pool order.
    pub fn from_candidates(query: EmbeddingVector, candidates: Vec<EmbeddingVector>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Empty("candidate pool"));
        }
        crate::geometry::validate_dataset(&candidates)?;
        let sims = query_similarities(&query, &candidates)?;
        let mut ranked: Vec<(f64, EmbeddingVector)> = sims.into_iter().zip(candidates).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.id.cmp(&b.1.id)));
        let (query_sims, candidates): (Vec<f64>, Vec<EmbeddingVector>) = ranked.into_iter().unzip();
        let pairwise = similarity_matrix(&candidates)?;
        let index = candidates.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        Ok(CandidatePool {
            query,
            candidates,
            query_sims,
            pairwise,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn query(&self) -> &EmbeddingVector {
        &self.query
    }

    pub fn candidates(&self) -> &[EmbeddingVector] {
        &self.candidates
    }

    pub fn query_sims(&self) -> &[f64] {
        &self.query_sims
    }

    pub fn pairwise(&self) -> &SimilarityMatrix {
        &self.pairwise
    }

    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.candidates.iter().map(|v| v.id)
    }

    pub fn position(&self, id: ItemId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.index.contains_key(&id)
    }

    /// Resolves ids to pool positions, rejecting unknown and repeated ids.
    pub(crate) fn positions(&self, ids: &[ItemId]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(ids.len());
        for &id in ids {
            let p = self.position(id).ok_or(Error::UnknownId(id))?;
            if out.contains(&p) {
                return Err(Error::DuplicateId(id));
            }
            out.push(p);
        }
        Ok(out)
    }
}

/// A first-stage retriever.
pub trait CandidateSource {
    fn top_n(&self, query: &EmbeddingVector, n: usize) -> Result<CandidatePool>;
}

/// Exact cosine scan over an in-memory corpus.
#[derive(Debug, Clone, Copy)]
pub struct ExactScan<'a> {
    corpus: &'a [EmbeddingVector],
}

impl<'a> ExactScan<'a> {
    pub fn new(corpus: &'a [EmbeddingVector]) -> Self {
        ExactScan { corpus }
    }
}

impl CandidateSource for ExactScan<'_> {
    fn top_n(&self, query: &EmbeddingVector, n: usize) -> Result<CandidatePool> {
        top_n_candidates(query, self.corpus, n)
    }
}

pub fn top_n_candidates(query: &EmbeddingVector, corpus: &[EmbeddingVector], n: usize) -> Result<CandidatePool> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("pool size must be at least 1".into()));
    }
    if n > corpus.len() {
        return Err(Error::TooMany {
            what: "candidates",
            requested: n,
            available: corpus.len(),
        });
    }
    let sims = query_similarities(query, corpus)?;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.sort_by(|&a, &b| sims[b].total_cmp(&sims[a]).then(corpus[a].id.cmp(&corpus[b].id)));
    let chosen = order[..n].iter().map(|&i| corpus[i].clone()).collect();
    CandidatePool::from_candidates(query.clone(), chosen)
}

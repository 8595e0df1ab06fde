//! Semantic compression: coverage + diversity subset selection over a pool.
//!
//! The objective for a selection `S` over pool `V` is
//!
//! ```text
//! f(S) = Σ_{v∈V} max_{s∈S} sim(v, s)  +  λ · Σ_{u,v∈S, u≠v} (1 − sim(u, v))
//! ```
//!
//! The diversity sum runs over ordered pairs, so every unordered pair counts
//! twice. With `λ = 0`, [`greedy_select`] returns the top-k of the pool by
//! query similarity; [`greedy_maximize`] always runs the plain greedy loop.

use serde::{Deserialize, Serialize};

use crate::candidates::CandidatePool;
use crate::error::{Error, Result};
use crate::geometry::ItemId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionConfig {
    pub k: usize,
    pub lambda: f64,
}

impl CompressionConfig {
    pub fn new(k: usize, lambda: f64) -> Result<Self> {
        let c = CompressionConfig { k, lambda };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Greedy selection order with the gain recorded at each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub chosen: Vec<ItemId>,
    pub marginal_gains: Vec<f64>,
    pub objective_value: f64,
}

fn coverage_at(pool: &CandidatePool, sel: &[usize]) -> f64 {
    let s = pool.pairwise();
    (0..pool.len())
        .map(|v| sel.iter().map(|&j| s.get(v, j)).fold(f64::NEG_INFINITY, f64::max))
        .sum()
}

fn diversity_at(pool: &CandidatePool, sel: &[usize]) -> f64 {
    let s = pool.pairwise();
    let mut total = 0.0;
    for &u in sel {
        for &v in sel {
            if u != v {
                total += 1.0 - s.get(u, v);
            }
        }
    }
    total
}

pub fn coverage_term(pool: &CandidatePool, selected: &[ItemId]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::Empty("selection"));
    }
    Ok(coverage_at(pool, &pool.positions(selected)?))
}

pub fn diversity_term(pool: &CandidatePool, selected: &[ItemId]) -> Result<f64> {
    Ok(diversity_at(pool, &pool.positions(selected)?))
}

pub fn objective(pool: &CandidatePool, selected: &[ItemId], config: &CompressionConfig) -> Result<f64> {
    let cov = coverage_term(pool, selected)?;
    let div = diversity_term(pool, selected)?;
    Ok(cov + config.lambda * div)
}

fn check_k(pool: &CandidatePool, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > pool.len() {
        return Err(Error::TooMany {
            what: "selected items",
            requested: k,
            available: pool.len(),
        });
    }
    Ok(())
}

/// The first `k` pool items, which are already in query-similarity order.
pub fn select_topk(pool: &CandidatePool, k: usize) -> Result<Vec<ItemId>> {
    check_k(pool, k)?;
    Ok(pool.ids().take(k).collect())
}

/// Greedy selection; dispatches to [`select_topk`] when `λ = 0`.
pub fn greedy_select(pool: &CandidatePool, config: &CompressionConfig) -> Result<SelectionTrace> {
    config.validate()?;
    check_k(pool, config.k)?;
    if config.lambda == 0.0 {
        let chosen = select_topk(pool, config.k)?;
        return Ok(trace_for_order(pool, chosen, config));
    }
    greedy_maximize(pool, config)
}

/// Plain greedy maximization of the objective, with no top-k special case.
///
/// Keeps each candidate's current best coverage and its summed dissimilarity
/// to the selection, so one step costs O(N²) regardless of |S|. Ties in the
/// gain go to the lower item id. The first step uses `f({v})` directly.
pub fn greedy_maximize(pool: &CandidatePool, config: &CompressionConfig) -> Result<SelectionTrace> {
    config.validate()?;
    check_k(pool, config.k)?;
    let n = pool.len();
    let s = pool.pairwise();
    let ids: Vec<ItemId> = pool.ids().collect();

    let mut best_cover: Option<Vec<f64>> = None;
    let mut dissim_to_sel = vec![0.0; n];
    let mut taken = vec![false; n];
    let mut chosen = Vec::with_capacity(config.k);
    let mut gains = Vec::with_capacity(config.k);

    for _ in 0..config.k {
        let mut pick: Option<(usize, f64)> = None;
        for c in 0..n {
            if taken[c] {
                continue;
            }
            let col = s.row(c);
            let cover_gain = match &best_cover {
                None => col.iter().sum::<f64>(),
                Some(cur) => cur.iter().zip(col).map(|(&b, &x)| (x - b).max(0.0)).sum(),
            };
            let gain = cover_gain + config.lambda * 2.0 * dissim_to_sel[c];
            let better = match pick {
                None => true,
                Some((p, g)) => gain > g || (gain == g && ids[c] < ids[p]),
            };
            if better {
                pick = Some((c, gain));
            }
        }
        let (c, gain) = pick.expect("k <= N leaves an unselected candidate");
        taken[c] = true;
        chosen.push(c);
        gains.push(gain);
        let col = s.row(c);
        match &mut best_cover {
            None => best_cover = Some(col.to_vec()),
            Some(cur) => cur.iter_mut().zip(col).for_each(|(b, &x)| *b = b.max(x)),
        }
        for (d, &x) in dissim_to_sel.iter_mut().zip(col) {
            *d += 1.0 - x;
        }
    }

    Ok(SelectionTrace {
        chosen: chosen.iter().map(|&c| ids[c]).collect(),
        objective_value: gains.iter().sum(),
        marginal_gains: gains,
    })
}

fn trace_for_order(pool: &CandidatePool, chosen: Vec<ItemId>, config: &CompressionConfig) -> SelectionTrace {
    let pos: Vec<usize> = chosen.iter().map(|&id| pool.position(id).expect("pool member")).collect();
    let mut gains = Vec::with_capacity(pos.len());
    let mut prev = 0.0;
    for step in 1..=pos.len() {
        let sel = &pos[..step];
        let f = coverage_at(pool, sel) + config.lambda * diversity_at(pool, sel);
        gains.push(f - prev);
        prev = f;
    }
    SelectionTrace {
        chosen,
        marginal_gains: gains,
        objective_value: prev,
    }
}

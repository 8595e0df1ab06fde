use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{normalize_adjacency, SemanticGraph};
use crate::error::{Error, Result};
use crate::geometry::ItemId;

/// Runs `num_walks` walks of up to `walk_length` steps from every seed,
/// following normalized edge weights, and counts the nodes stepped onto.
///
/// The start node is not counted. A walk that reaches a dangling node stops
/// there, so the total count is `num_walks × |seeds| × walk_length` only when
/// no walk hits one. Output is sorted by count (descending), then id.
pub fn random_walk_expand(
    graph: &SemanticGraph,
    seeds: &[ItemId],
    walk_length: usize,
    num_walks: usize,
    rng_seed: u64,
) -> Result<Vec<(ItemId, u64)>> {
    if seeds.is_empty() {
        return Err(Error::Empty("seed set"));
    }
    if walk_length == 0 || num_walks == 0 {
        return Err(Error::InvalidParameter("walk_length and num_walks must be at least 1".into()));
    }
    let starts: Vec<usize> = seeds
        .iter()
        .map(|&s| graph.position(s).ok_or(Error::UnknownId(s)))
        .collect::<Result<_>>()?;

    let adj = normalize_adjacency(graph);
    let transitions: Vec<Vec<(usize, f64)>> = (0..adj.len())
        .map(|i| {
            let mut acc = 0.0;
            adj.row(i)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(j, &p)| {
                    acc += p;
                    (j, acc)
                })
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut counts: HashMap<usize, u64> = HashMap::new();
    for &start in &starts {
        for _ in 0..num_walks {
            let mut at = start;
            for _ in 0..walk_length {
                let row = &transitions[at];
                let Some(&(_, total)) = row.last() else { break };
                let u = rng.random::<f64>() * total;
                let idx = row.partition_point(|&(_, c)| c <= u).min(row.len() - 1);
                at = row[idx].0;
                *counts.entry(at).or_default() += 1;
            }
        }
    }

    let order = adj.order();
    let mut out: Vec<(ItemId, u64)> = counts.into_iter().map(|(i, c)| (order[i], c)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out)
}

//! Brute-force reference: enumerate every witness and sort.

use std::collections::HashMap;

use crate::dijkstra::{distances, Direction};
use crate::error::{Error, Result};
use crate::graph::{CategoryMap, Graph};
use crate::{CategoryId, Cost, VertexId};

use super::Witness;

/// Largest number of candidate witnesses the oracle will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// The `k` cheapest witnesses `⟨s, v1, .., vj, t⟩` with `vi ∈ C[i]`, ordered
/// by `(cost, vertex sequence)`. Legs are costed by independent Dijkstra runs.
pub fn oracle_topk(
    g: &Graph,
    cm: &CategoryMap,
    s: VertexId,
    t: VertexId,
    sequence: &[CategoryId],
    k: usize,
) -> Result<Vec<Witness>> {
    for v in [s, t] {
        if !g.contains(v) {
            return Err(Error::InvalidVertex(v));
        }
    }
    for &c in sequence {
        cm.check(c)?;
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let total: u128 = sequence.iter().map(|&c| cm.size(c) as u128).product();
    if total > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard(total));
    }

    let mut from: HashMap<VertexId, Vec<Option<Cost>>> = HashMap::new();
    let mut leg = |a: VertexId, b: VertexId| -> Option<Cost> {
        from.entry(a)
            .or_insert_with(|| distances(g, a, Direction::Forward))[b as usize]
    };

    let mut all = Vec::new();
    let mut picks = vec![0usize; sequence.len()];
    'outer: loop {
        if sequence.iter().all(|&c| cm.size(c) > 0) {
            let mut vertices = Vec::with_capacity(sequence.len() + 2);
            vertices.push(s);
            vertices.extend(sequence.iter().zip(&picks).map(|(&c, &i)| cm.members(c)[i]));
            vertices.push(t);
            let cost = vertices
                .windows(2)
                .try_fold(0, |acc, w| leg(w[0], w[1]).map(|d| acc + d));
            if let Some(cost) = cost {
                all.push(Witness { vertices, cost });
            }
        } else {
            break;
        }
        // odometer step
        for pos in (0..picks.len()).rev() {
            picks[pos] += 1;
            if picks[pos] < cm.size(sequence[pos]) {
                continue 'outer;
            }
            picks[pos] = 0;
        }
        break;
    }
    all.sort_by(|a, b| (a.cost, &a.vertices).cmp(&(b.cost, &b.vertices)));
    all.truncate(k);
    Ok(all)
}

//! The best-first search shared by all engines.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::Instant;

use super::nen::NenCursors;
use super::source::{NeighborSource, Slot};
use super::{Algorithm, QueryOutcome, QueryStats, TraceEvent, Witness};
use crate::error::{Error, Result};
use crate::{CategoryId, Cost, VertexId};

/// A partial witness. Ordered by `(key, witness)` so that every queue breaks
/// cost ties lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    key: Cost,
    witness: Vec<VertexId>,
    cost: Cost,
    last_leg: Cost,
    rank: Option<u32>,
}

struct Search<'s, S: ?Sized> {
    source: &'s mut S,
    s: VertexId,
    algorithm: Algorithm,
    sequence: &'s [CategoryId],
    nen: NenCursors,
    frontier: BinaryHeap<Reverse<Node>>,
    dominating: HashMap<(VertexId, usize), Vec<VertexId>>,
    dominated: HashMap<(VertexId, usize), BinaryHeap<Reverse<Node>>>,
    stats: QueryStats,
    trace: Option<Vec<TraceEvent>>,
}

impl<S: NeighborSource + ?Sized> Search<'_, S> {
    /// Member set of witness position `i` (1-based; the last one is `t`).
    fn slot(&self, i: usize) -> Slot {
        match self.sequence.get(i - 1) {
            Some(&c) => Slot::Category(c),
            None => Slot::Target,
        }
    }

    fn log(&mut self, event: impl FnOnce() -> TraceEvent) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(event());
        }
    }

    /// Extends `prefix` by the `x`-th neighbor of its last vertex in the next
    /// position's member set.
    fn child(&mut self, prefix: &[VertexId], prefix_cost: Cost, x: u32) -> Option<Node> {
        let v = *prefix.last().expect("witness starts at the source");
        let slot = self.slot(prefix.len());
        let (u, leg, key) = if self.algorithm == Algorithm::Star {
            let e = self.nen.find_nen(self.source, v, slot, x as usize)?;
            (e.vertex, e.dist, prefix_cost + e.estimate)
        } else {
            let (u, d) = self.source.nearest(v, slot, x as usize)?;
            (u, d, prefix_cost + d)
        };
        let mut witness = Vec::with_capacity(prefix.len() + 1);
        witness.extend_from_slice(prefix);
        witness.push(u);
        Some(Node {
            key,
            witness,
            cost: prefix_cost + leg,
            last_leg: leg,
            rank: Some(x),
        })
    }

    fn insert(&mut self, node: Node) {
        self.log(|| TraceEvent::Inserted {
            witness: node.witness.clone(),
            key: node.key,
            rank: node.rank,
        });
        self.frontier.push(Reverse(node));
    }

    /// Releases the cheapest route parked behind each prefix of `result`.
    fn reconsider(&mut self, result: &[VertexId]) {
        for i in 1..result.len() - 1 {
            let at = (result[i], i + 1);
            if self
                .dominating
                .get(&at)
                .is_none_or(|w| w.as_slice() != &result[..=i])
            {
                continue;
            }
            self.dominating.remove(&at);
            if let Some(Reverse(mut node)) = self.dominated.get_mut(&at).and_then(BinaryHeap::pop) {
                node.rank = None;
                self.log(|| TraceEvent::Reinserted {
                    witness: node.witness.clone(),
                    key: node.key,
                });
                self.frontier.push(Reverse(node));
            }
        }
    }

    fn run(&mut self, k: usize, deadline: Option<Instant>) -> Result<Vec<Witness>> {
        let s = self.s;
        let root_key = if self.algorithm == Algorithm::Star {
            match self.source.to_target(s) {
                Some(h) => h,
                None => return Ok(Vec::new()),
            }
        } else {
            0
        };
        self.insert(Node {
            key: root_key,
            witness: vec![s],
            cost: 0,
            last_leg: 0,
            rank: Some(1),
        });

        let full = self.sequence.len() + 2;
        let mut results: Vec<Witness> = Vec::new();
        let mut emitted: HashSet<Vec<VertexId>> = HashSet::new();
        while results.len() < k {
            let Some(Reverse(node)) = self.frontier.pop() else {
                break;
            };
            self.stats.examined_routes += 1;
            if self.stats.examined_routes.is_multiple_of(16)
                && deadline.is_some_and(|d| Instant::now() >= d)
            {
                return Err(Error::DeadlineExceeded);
            }
            self.log(|| TraceEvent::Extracted {
                witness: node.witness.clone(),
                key: node.key,
                rank: node.rank,
            });

            if node.witness.len() == full {
                if !emitted.insert(node.witness.clone()) {
                    self.log(|| TraceEvent::DuplicateDiscarded {
                        witness: node.witness.clone(),
                    });
                    continue;
                }
                self.log(|| TraceEvent::Emitted {
                    witness: node.witness.clone(),
                    cost: node.cost,
                });
                if self.algorithm != Algorithm::Kpne {
                    self.reconsider(&node.witness);
                }
                results.push(Witness {
                    vertices: node.witness,
                    cost: node.cost,
                });
                continue;
            }

            let q = node.witness.len() - 1;
            let v = node.witness[q];
            let extend = if self.algorithm == Algorithm::Kpne {
                true
            } else {
                let at = (v, node.witness.len());
                if let Entry::Vacant(slot) = self.dominating.entry(at) {
                    slot.insert(node.witness.clone());
                    true
                } else {
                    self.log(|| TraceEvent::Parked {
                        witness: node.witness.clone(),
                        key: node.key,
                    });
                    self.dominated
                        .entry(at)
                        .or_default()
                        .push(Reverse(node.clone()));
                    false
                }
            };
            if extend {
                self.stats.extended_routes += 1;
                self.log(|| TraceEvent::Extended {
                    witness: node.witness.clone(),
                });
                if let Some(child) = self.child(&node.witness, node.cost, 1) {
                    self.insert(child);
                }
            }
            if let (true, Some(x)) = (q > 0, node.rank) {
                let prefix = &node.witness[..q];
                if let Some(sibling) = self.child(prefix, node.cost - node.last_leg, x + 1) {
                    self.insert(sibling);
                }
            }
        }
        Ok(results)
    }
}

pub(super) fn search<S: NeighborSource + ?Sized>(
    source: &mut S,
    algorithm: Algorithm,
    s: VertexId,
    sequence: &[CategoryId],
    k: usize,
    deadline: Option<Instant>,
    trace: bool,
) -> Result<QueryOutcome> {
    let start = Instant::now();
    let mut search = Search {
        source,
        s,
        algorithm,
        sequence,
        nen: NenCursors::new(),
        frontier: BinaryHeap::new(),
        dominating: HashMap::new(),
        dominated: HashMap::new(),
        stats: QueryStats::default(),
        trace: trace.then(Vec::new),
    };
    let witnesses = search.run(k, deadline)?;
    let mut stats = search.stats;
    stats.nn_queries = search.source.nn_queries();
    stats.runtime = start.elapsed();
    stats.result_costs = witnesses.iter().map(|w| w.cost).collect();
    Ok(QueryOutcome {
        witnesses,
        stats,
        trace: search.trace.unwrap_or_default(),
    })
}

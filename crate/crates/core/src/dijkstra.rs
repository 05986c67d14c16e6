//! Plain Dijkstra searches: full single-source distances and the
//! "settle until the x-th category member" nearest-neighbor query.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::graph::Graph;
use crate::{Cost, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Shortest distances from `source` (or to it, when `Backward`).
pub fn distances(g: &Graph, source: VertexId, direction: Direction) -> Vec<Option<Cost>> {
    let n = g.vertex_count();
    let mut dist: Vec<Option<Cost>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = Some(0);
    heap.push(Reverse((0, source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if settled[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        let arcs = match direction {
            Direction::Forward => g.out_arcs(u),
            Direction::Backward => g.in_arcs(u),
        };
        for a in arcs {
            if a.head == u {
                continue;
            }
            let nd = d + a.weight;
            let slot = &mut dist[a.head as usize];
            if slot.is_none_or(|old| nd < old) {
                *slot = Some(nd);
                heap.push(Reverse((nd, a.head)));
            }
        }
    }
    dist
}

/// The first `x` vertices accepted by `is_member`, ordered by
/// `(distance from v, vertex id)`. Shorter when fewer are reachable.
///
/// The search settles every vertex tied with the x-th member's distance
/// before stopping, so zero-weight arcs cannot disturb the id order.
pub fn nearest_members(
    g: &Graph,
    v: VertexId,
    x: usize,
    mut is_member: impl FnMut(VertexId) -> bool,
) -> Vec<(VertexId, Cost)> {
    let n = g.vertex_count();
    let mut dist: Vec<Option<Cost>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut found: Vec<(VertexId, Cost)> = Vec::new();
    dist[v as usize] = Some(0);
    heap.push(Reverse((0, v)));
    while let Some(&Reverse((d, u))) = heap.peek() {
        if found.len() >= x && d > found[x - 1].1 {
            break;
        }
        heap.pop();
        if settled[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        if is_member(u) {
            found.push((u, d));
        }
        for a in g.out_arcs(u) {
            if a.head == u {
                continue;
            }
            let nd = d + a.weight;
            let slot = &mut dist[a.head as usize];
            if slot.is_none_or(|old| nd < old) {
                *slot = Some(nd);
                heap.push(Reverse((nd, a.head)));
            }
        }
    }
    found.sort_by_key(|&(u, d)| (d, u));
    found.truncate(x);
    found
}

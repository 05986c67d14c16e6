//! Nearest-neighbor sources for the search engines: the label-based one
//! backed by the inverted index, and a Dijkstra-based fallback.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::dijkstra::{distances, nearest_members, Direction};
use crate::graph::{CategoryMap, Graph};
use crate::inverted::{CategoryLookup, NnCursors};
use crate::labeling::LabelLookup;
use crate::{CategoryId, Cost, VertexId};

/// Which member set a witness position draws from. The destination acts as
/// a singleton category appended to the query's sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Category(CategoryId),
    Target,
}

pub type Filter<'a> = &'a dyn Fn(CategoryId, VertexId) -> bool;

pub trait NeighborSource {
    fn target(&self) -> VertexId;

    /// The `x`-th (1-based) nearest member of `slot` from `v`, ties by id.
    fn nearest(&mut self, v: VertexId, slot: Slot, x: usize) -> Option<(VertexId, Cost)>;

    /// `dis(v, t)` for the query destination.
    fn to_target(&mut self, v: VertexId) -> Option<Cost>;

    /// Non-cached nearest-neighbor searches so far.
    fn nn_queries(&self) -> u64;
}

/// Label-backed source: categories through the inverted lists, the
/// destination through label joins.
pub struct LabelNeighbors<'a, L: ?Sized, I: ?Sized> {
    labels: &'a L,
    inverted: &'a I,
    target: VertexId,
    cursors: NnCursors,
    target_dist: HashMap<VertexId, Option<Cost>>,
    target_nn: HashSet<VertexId>,
    filter: Option<Filter<'a>>,
}

impl<'a, L, I> LabelNeighbors<'a, L, I>
where
    L: LabelLookup + ?Sized,
    I: CategoryLookup + ?Sized,
{
    pub fn new(
        labels: &'a L,
        inverted: &'a I,
        target: VertexId,
        filter: Option<Filter<'a>>,
    ) -> Self {
        LabelNeighbors {
            labels,
            inverted,
            target,
            cursors: NnCursors::new(),
            target_dist: HashMap::new(),
            target_nn: HashSet::new(),
            filter,
        }
    }
}

impl<L, I> NeighborSource for LabelNeighbors<'_, L, I>
where
    L: LabelLookup + ?Sized,
    I: CategoryLookup + ?Sized,
{
    fn target(&self) -> VertexId {
        self.target
    }

    fn nearest(&mut self, v: VertexId, slot: Slot, x: usize) -> Option<(VertexId, Cost)> {
        match slot {
            Slot::Category(c) => match self.filter {
                Some(f) => {
                    let keep = move |u: VertexId| f(c, u);
                    self.cursors
                        .find_nn(self.labels, self.inverted, v, c, x, Some(&keep))
                }
                None => self
                    .cursors
                    .find_nn(self.labels, self.inverted, v, c, x, None),
            },
            Slot::Target => {
                if x != 1 {
                    return None;
                }
                self.target_nn.insert(v);
                let t = self.target;
                self.to_target(v).map(|d| (t, d))
            }
        }
    }

    fn to_target(&mut self, v: VertexId) -> Option<Cost> {
        let (labels, t) = (self.labels, self.target);
        *self
            .target_dist
            .entry(v)
            .or_insert_with(|| labels.dist(v, t))
    }

    fn nn_queries(&self) -> u64 {
        self.cursors.nn_queries() + self.target_nn.len() as u64
    }
}

/// Incremental single-source search that yields members of one category in
/// `(distance, id)` order.
#[derive(Debug, Default)]
struct DijkstraCursor {
    found: Vec<(VertexId, Cost)>,
    dist: HashMap<VertexId, Cost>,
    settled: HashSet<VertexId>,
    heap: BinaryHeap<Reverse<(Cost, VertexId)>>,
    pending: BinaryHeap<Reverse<(Cost, VertexId)>>,
}

impl DijkstraCursor {
    fn new(v: VertexId) -> Self {
        let mut cursor = DijkstraCursor::default();
        cursor.dist.insert(v, 0);
        cursor.heap.push(Reverse((0, v)));
        cursor
    }

    fn next(
        &mut self,
        g: &Graph,
        mut is_member: impl FnMut(VertexId) -> bool,
    ) -> Option<(VertexId, Cost)> {
        loop {
            if let Some(&Reverse((d, u))) = self.pending.peek() {
                // a member is final once nothing left in the frontier can tie it
                if self.heap.peek().is_none_or(|&Reverse((f, _))| f > d) {
                    self.pending.pop();
                    self.found.push((u, d));
                    return Some((u, d));
                }
            }
            let Reverse((d, u)) = self.heap.pop()?;
            if !self.settled.insert(u) {
                continue;
            }
            if is_member(u) {
                self.pending.push(Reverse((d, u)));
            }
            for a in g.out_arcs(u) {
                if a.head == u {
                    continue;
                }
                let nd = d + a.weight;
                let slot = self.dist.entry(a.head).or_insert(Cost::MAX);
                if nd < *slot {
                    *slot = nd;
                    self.heap.push(Reverse((nd, a.head)));
                }
            }
        }
    }
}

/// Dijkstra-backed source used by the `-dij` engine variants.
pub struct DijkstraNeighbors<'a> {
    graph: &'a Graph,
    categories: &'a CategoryMap,
    target: VertexId,
    cursors: HashMap<(VertexId, CategoryId), DijkstraCursor>,
    to_target: Option<Vec<Option<Cost>>>,
    target_nn: HashSet<VertexId>,
    nn_queries: u64,
    filter: Option<Filter<'a>>,
}

impl<'a> DijkstraNeighbors<'a> {
    pub fn new(
        graph: &'a Graph,
        categories: &'a CategoryMap,
        target: VertexId,
        filter: Option<Filter<'a>>,
    ) -> Self {
        DijkstraNeighbors {
            graph,
            categories,
            target,
            cursors: HashMap::new(),
            to_target: None,
            target_nn: HashSet::new(),
            nn_queries: 0,
            filter,
        }
    }
}

impl NeighborSource for DijkstraNeighbors<'_> {
    fn target(&self) -> VertexId {
        self.target
    }

    fn nearest(&mut self, v: VertexId, slot: Slot, x: usize) -> Option<(VertexId, Cost)> {
        match slot {
            Slot::Category(c) => {
                let cursor = self
                    .cursors
                    .entry((v, c))
                    .or_insert_with(|| DijkstraCursor::new(v));
                if x <= cursor.found.len() {
                    return Some(cursor.found[x - 1]);
                }
                self.nn_queries += 1;
                let (cm, filter) = (self.categories, self.filter);
                let is_member = |u| cm.contains(c, u) && filter.is_none_or(|f| f(c, u));
                while cursor.found.len() < x {
                    cursor.next(self.graph, is_member)?;
                }
                Some(cursor.found[x - 1])
            }
            Slot::Target => {
                if x != 1 {
                    return None;
                }
                self.target_nn.insert(v);
                let t = self.target;
                self.to_target(v).map(|d| (t, d))
            }
        }
    }

    fn to_target(&mut self, v: VertexId) -> Option<Cost> {
        let (g, t) = (self.graph, self.target);
        self.to_target
            .get_or_insert_with(|| distances(g, t, Direction::Backward))[v as usize]
    }

    fn nn_queries(&self) -> u64 {
        self.nn_queries + self.target_nn.len() as u64
    }
}

/// The `x`-th nearest member of `c` from `v` by a search that stops once
/// that member is settled.
pub fn dijkstra_nn(
    g: &Graph,
    cm: &CategoryMap,
    v: VertexId,
    c: CategoryId,
    x: usize,
) -> Option<(VertexId, Cost)> {
    assert!(x >= 1, "ranks start at 1");
    nearest_members(g, v, x, |u| cm.contains(c, u))
        .get(x - 1)
        .copied()
}

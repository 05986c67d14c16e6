//! Per-category inverted label indexes and incremental nearest-neighbor
//! cursors over them.
//!
//! For category `C`, `IL(h)` lists every member `u` with `h ∈ L_in(u)` as
//! `(u, d(h, u))`, ascending by distance. The x-th nearest member of `C`
//! from `v` is then a k-way merge of the lists `IL(h)` for `h ∈ L_out(v)`,
//! each shifted by `d(v, h)`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::io::{Read, Write};

use crate::codec::{get_u32, get_u64, put_u32, put_u64};
use crate::error::{Error, Result};
use crate::graph::CategoryMap;
use crate::labeling::LabelLookup;
use crate::{CategoryId, Cost, VertexId};

/// Ordered by `(dist, member)`, which is the list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InvertedEntry {
    pub dist: Cost,
    pub member: VertexId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryInvertedIndex {
    lists: BTreeMap<VertexId, Vec<InvertedEntry>>,
}

impl CategoryInvertedIndex {
    pub fn build<L: LabelLookup + ?Sized>(labels: &L, members: &[VertexId]) -> Self {
        let mut lists: BTreeMap<VertexId, Vec<InvertedEntry>> = BTreeMap::new();
        for &u in members {
            for e in labels.in_label(u) {
                lists.entry(e.hub).or_default().push(InvertedEntry {
                    dist: e.dist,
                    member: u,
                });
            }
        }
        for list in lists.values_mut() {
            list.sort_unstable();
        }
        CategoryInvertedIndex { lists }
    }

    pub fn list(&self, hub: VertexId) -> &[InvertedEntry] {
        self.lists.get(&hub).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn hubs(&self) -> impl Iterator<Item = (VertexId, &[InvertedEntry])> {
        self.lists.iter().map(|(&h, l)| (h, l.as_slice()))
    }

    pub fn entry_count(&self) -> usize {
        self.lists.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Inserts `v`'s in-label entries at their sorted positions.
    pub fn insert_member<L: LabelLookup + ?Sized>(&mut self, labels: &L, v: VertexId) {
        for e in labels.in_label(v) {
            let entry = InvertedEntry {
                dist: e.dist,
                member: v,
            };
            let list = self.lists.entry(e.hub).or_default();
            if let Err(pos) = list.binary_search(&entry) {
                list.insert(pos, entry);
            }
        }
    }

    pub fn remove_member<L: LabelLookup + ?Sized>(&mut self, labels: &L, v: VertexId) {
        for e in labels.in_label(v) {
            let entry = InvertedEntry {
                dist: e.dist,
                member: v,
            };
            if let Some(list) = self.lists.get_mut(&e.hub) {
                if let Ok(pos) = list.binary_search(&entry) {
                    list.remove(pos);
                }
                if list.is_empty() {
                    self.lists.remove(&e.hub);
                }
            }
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        put_u32(w, self.lists.len() as u32)?;
        for (&hub, list) in &self.lists {
            put_u32(w, hub)?;
            put_u32(w, list.len() as u32)?;
            for e in list {
                put_u32(w, e.member)?;
                put_u64(w, e.dist)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let hubs = get_u32(r)?;
        let mut lists = BTreeMap::new();
        for _ in 0..hubs {
            let hub = get_u32(r)?;
            let len = get_u32(r)? as usize;
            let mut list = Vec::with_capacity(len);
            for _ in 0..len {
                let member = get_u32(r)?;
                let dist = get_u64(r)?;
                list.push(InvertedEntry { dist, member });
            }
            if list.is_empty() || list.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::Corrupt(format!(
                    "inverted list of hub {hub} is not sorted"
                )));
            }
            lists.insert(hub, list);
        }
        Ok(CategoryInvertedIndex { lists })
    }
}

/// Access to per-category inverted indexes.
pub trait CategoryLookup {
    fn inverted(&self, c: CategoryId) -> Option<&CategoryInvertedIndex>;
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InvertedLabelIndex {
    categories: Vec<CategoryInvertedIndex>,
}

impl InvertedLabelIndex {
    pub fn build<L: LabelLookup + ?Sized>(labels: &L, cm: &CategoryMap) -> Self {
        let categories = (0..cm.category_count() as CategoryId)
            .map(|c| CategoryInvertedIndex::build(labels, cm.members(c)))
            .collect();
        InvertedLabelIndex { categories }
    }

    pub fn from_parts(categories: Vec<CategoryInvertedIndex>) -> Self {
        InvertedLabelIndex { categories }
    }

    pub fn category(&self, c: CategoryId) -> Option<&CategoryInvertedIndex> {
        self.categories.get(c as usize)
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }
}

impl CategoryLookup for InvertedLabelIndex {
    fn inverted(&self, c: CategoryId) -> Option<&CategoryInvertedIndex> {
        self.category(c)
    }
}

pub fn build_inverted_index<L: LabelLookup + ?Sized>(
    labels: &L,
    cm: &CategoryMap,
    c: CategoryId,
) -> Result<CategoryInvertedIndex> {
    cm.check(c)?;
    Ok(CategoryInvertedIndex::build(labels, cm.members(c)))
}

fn grow_to(il: &mut InvertedLabelIndex, cm: &CategoryMap) {
    while il.categories.len() < cm.category_count() {
        il.categories.push(CategoryInvertedIndex::default());
    }
}

/// Adds `v` to category `c` and to its inverted index. Returns `false` (and
/// changes nothing) when `v` already belongs to `c`.
pub fn add_vertex_category<L: LabelLookup + ?Sized>(
    cm: &mut CategoryMap,
    il: &mut InvertedLabelIndex,
    labels: &L,
    v: VertexId,
    c: CategoryId,
) -> Result<bool> {
    if !cm.insert(v, c)? {
        return Ok(false);
    }
    grow_to(il, cm);
    il.categories[c as usize].insert_member(labels, v);
    Ok(true)
}

/// Removes `v` from category `c`. Returns `false` when it was not a member.
pub fn remove_vertex_category<L: LabelLookup + ?Sized>(
    cm: &mut CategoryMap,
    il: &mut InvertedLabelIndex,
    labels: &L,
    v: VertexId,
    c: CategoryId,
) -> Result<bool> {
    if !cm.remove(v, c)? {
        return Ok(false);
    }
    grow_to(il, cm);
    il.categories[c as usize].remove_member(labels, v);
    Ok(true)
}

#[derive(Debug, Clone, Copy)]
struct Head {
    hub: VertexId,
    hub_dist: Cost,
    pos: usize,
}

/// Incremental x-th nearest neighbor state for one `(v, category)` pair.
#[derive(Debug, Clone, Default)]
pub struct NnCursor {
    found: Vec<(VertexId, Cost)>,
    seen: HashSet<VertexId>,
    heads: Vec<Head>,
    queue: BinaryHeap<Reverse<(Cost, VertexId, usize)>>,
    started: bool,
    consumed: usize,
}

impl NnCursor {
    /// Neighbors produced so far, nearest first.
    pub fn found(&self) -> &[(VertexId, Cost)] {
        &self.found
    }

    /// Inverted-list positions read so far.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    fn start<L: LabelLookup + ?Sized>(
        &mut self,
        labels: &L,
        ci: &CategoryInvertedIndex,
        v: VertexId,
    ) {
        self.started = true;
        for e in labels.out_label(v) {
            let list = ci.list(e.hub);
            if let Some(first) = list.first() {
                let idx = self.heads.len();
                self.heads.push(Head {
                    hub: e.hub,
                    hub_dist: e.dist,
                    pos: 0,
                });
                self.queue
                    .push(Reverse((e.dist + first.dist, first.member, idx)));
                self.consumed += 1;
            }
        }
    }

    /// Produces the next nearest member. The queue holds the current head of
    /// every matching hub list; a member reached again through a farther hub
    /// is skipped when popped.
    fn next<L: LabelLookup + ?Sized>(
        &mut self,
        labels: &L,
        ci: &CategoryInvertedIndex,
        v: VertexId,
        filter: Option<&dyn Fn(VertexId) -> bool>,
    ) -> Option<(VertexId, Cost)> {
        if !self.started {
            self.start(labels, ci, v);
        }
        while let Some(Reverse((cost, member, idx))) = self.queue.pop() {
            let head = &mut self.heads[idx];
            head.pos += 1;
            let list = ci.list(head.hub);
            if let Some(e) = list.get(head.pos) {
                self.queue
                    .push(Reverse((head.hub_dist + e.dist, e.member, idx)));
                self.consumed += 1;
            }
            if !self.seen.insert(member) {
                continue;
            }
            if filter.is_some_and(|f| !f(member)) {
                continue;
            }
            self.found.push((member, cost));
            return Some((member, cost));
        }
        None
    }
}

/// Query-scoped cursor store keyed by `(vertex, category)`.
#[derive(Debug, Default)]
pub struct NnCursors {
    cursors: HashMap<(VertexId, CategoryId), NnCursor>,
    nn_queries: u64,
    cache_hits: u64,
}

impl NnCursors {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of calls that had to scan the inverted lists.
    pub fn nn_queries(&self) -> u64 {
        self.nn_queries
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits
    }

    pub fn cursor(&self, v: VertexId, c: CategoryId) -> Option<&NnCursor> {
        self.cursors.get(&(v, c))
    }

    /// The `x`-th (1-based) nearest member of `c` from `v`, ties broken by
    /// vertex id. Ranks already produced are served from the cursor without
    /// counting as a query.
    #[allow(clippy::too_many_arguments)]
    pub fn find_nn<L, I>(
        &mut self,
        labels: &L,
        il: &I,
        v: VertexId,
        c: CategoryId,
        x: usize,
        filter: Option<&dyn Fn(VertexId) -> bool>,
    ) -> Option<(VertexId, Cost)>
    where
        L: LabelLookup + ?Sized,
        I: CategoryLookup + ?Sized,
    {
        assert!(x >= 1, "ranks start at 1");
        let cursor = self.cursors.entry((v, c)).or_default();
        if x <= cursor.found.len() {
            self.cache_hits += 1;
            return Some(cursor.found[x - 1]);
        }
        let ci = il.inverted(c)?;
        self.nn_queries += 1;
        while cursor.found.len() < x {
            cursor.next(labels, ci, v, filter)?;
        }
        Some(cursor.found[x - 1])
    }
}

/// Convenience wrapper over [`NnCursors::find_nn`] without a filter.
pub fn find_nn<L, I>(
    store: &mut NnCursors,
    labels: &L,
    il: &I,
    v: VertexId,
    c: CategoryId,
    x: usize,
) -> Option<(VertexId, Cost)>
where
    L: LabelLookup + ?Sized,
    I: CategoryLookup + ?Sized,
{
    store.find_nn(labels, il, v, c, x, None)
}

//! 2-hop labels built by pruned landmark labeling.
//!
//! Every vertex keeps an out-label (hubs it reaches) and an in-label (hubs
//! that reach it). For every reachable pair `(s, t)` some hub on a shortest
//! `s → t` path appears in both `L_out(s)` and `L_in(t)`, so distances are a
//! merge join over the two hub-sorted lists. Entries also record the next
//! vertex towards the hub, which is enough to unroll actual paths.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{Read, Write};

use crate::codec::{expect_magic, expect_version, get_u32, get_u64, put_u32, put_u64};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::{Cost, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelEntry {
    pub hub: VertexId,
    pub dist: Cost,
    /// Neighbor of the labeled vertex on the stored shortest path to (or
    /// from) the hub. Equal to the vertex itself for its own hub entry.
    pub parent: VertexId,
}

/// Read access to label lists, implemented by the full in-memory index and
/// by the partial per-query view loaded from disk.
pub trait LabelLookup {
    fn vertex_count(&self) -> usize;
    fn out_label(&self, v: VertexId) -> &[LabelEntry];
    fn in_label(&self, v: VertexId) -> &[LabelEntry];

    fn dist(&self, s: VertexId, t: VertexId) -> Option<Cost> {
        if s == t {
            return Some(0);
        }
        join(self.out_label(s), self.in_label(t)).map(|(d, _)| d)
    }
}

/// Merge join over two hub-sorted lists. Returns the minimum combined
/// distance and the first hub (in hub order) achieving it.
pub fn join(out: &[LabelEntry], inn: &[LabelEntry]) -> Option<(Cost, VertexId)> {
    let (mut i, mut j) = (0, 0);
    let mut best: Option<(Cost, VertexId)> = None;
    while i < out.len() && j < inn.len() {
        let (a, b) = (&out[i], &inn[j]);
        if a.hub < b.hub {
            i += 1;
        } else if a.hub > b.hub {
            j += 1;
        } else {
            let d = a.dist + b.dist;
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, a.hub));
            }
            i += 1;
            j += 1;
        }
    }
    best
}

fn find_hub(label: &[LabelEntry], hub: VertexId) -> Option<&LabelEntry> {
    label
        .binary_search_by_key(&hub, |e| e.hub)
        .ok()
        .map(|i| &label[i])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelIndex {
    directed: bool,
    out_labels: Vec<Vec<LabelEntry>>,
    /// Empty for undirected graphs, where one list serves both directions.
    in_labels: Vec<Vec<LabelEntry>>,
    landmark_order: Vec<VertexId>,
}

/// Landmarks by descending total degree, ties by ascending id.
pub fn landmark_order(g: &Graph) -> Vec<VertexId> {
    let mut order: Vec<VertexId> = (0..g.vertex_count() as VertexId).collect();
    order.sort_by_key(|&v| (Reverse(g.degree(v)), v));
    order
}

// Construction-time entry: hubs are landmark ranks, appended in rank order.
#[derive(Clone, Copy)]
struct RankEntry {
    rank: u32,
    dist: Cost,
    parent: VertexId,
}

struct PrunedSearch {
    dist: Vec<Cost>,
    parent: Vec<VertexId>,
    touched: Vec<VertexId>,
    settled: Vec<bool>,
    root_label: Vec<Cost>,
    heap: BinaryHeap<Reverse<(Cost, VertexId)>>,
}

impl PrunedSearch {
    fn new(n: usize) -> Self {
        PrunedSearch {
            dist: vec![Cost::MAX; n],
            parent: vec![0; n],
            touched: Vec::new(),
            settled: vec![false; n],
            root_label: vec![Cost::MAX; n],
            heap: BinaryHeap::new(),
        }
    }

    /// One pruned Dijkstra from `root` (rank `rank`). `root_side` is the
    /// root's label in the opposite direction, `labels` the lists that
    /// receive new entries.
    fn run(
        &mut self,
        g: &Graph,
        root: VertexId,
        rank: u32,
        forward: bool,
        root_side: &[RankEntry],
        labels: &mut [Vec<RankEntry>],
    ) {
        for e in root_side {
            self.root_label[e.rank as usize] = e.dist;
        }
        self.dist[root as usize] = 0;
        self.parent[root as usize] = root;
        self.touched.push(root);
        self.heap.push(Reverse((0, root)));
        while let Some(Reverse((d, u))) = self.heap.pop() {
            if self.settled[u as usize] {
                continue;
            }
            self.settled[u as usize] = true;
            let covered = labels[u as usize].iter().any(|e| {
                let r = self.root_label[e.rank as usize];
                r != Cost::MAX && r + e.dist <= d
            });
            if covered {
                continue;
            }
            labels[u as usize].push(RankEntry {
                rank,
                dist: d,
                parent: self.parent[u as usize],
            });
            let arcs = if forward { g.out_arcs(u) } else { g.in_arcs(u) };
            for a in arcs {
                let w = a.head;
                if w == u || self.settled[w as usize] {
                    continue;
                }
                let nd = d + a.weight;
                if nd < self.dist[w as usize] {
                    if self.dist[w as usize] == Cost::MAX {
                        self.touched.push(w);
                    }
                    self.dist[w as usize] = nd;
                    self.parent[w as usize] = u;
                    self.heap.push(Reverse((nd, w)));
                }
            }
        }
        for &v in &self.touched {
            self.dist[v as usize] = Cost::MAX;
            self.settled[v as usize] = false;
        }
        self.touched.clear();
        for e in root_side {
            self.root_label[e.rank as usize] = Cost::MAX;
        }
    }
}

fn finalize(labels: Vec<Vec<RankEntry>>, order: &[VertexId]) -> Vec<Vec<LabelEntry>> {
    labels
        .into_iter()
        .map(|list| {
            let mut out: Vec<LabelEntry> = list
                .into_iter()
                .map(|e| LabelEntry {
                    hub: order[e.rank as usize],
                    dist: e.dist,
                    parent: e.parent,
                })
                .collect();
            out.sort_unstable_by_key(|e| e.hub);
            out
        })
        .collect()
}

impl LabelIndex {
    /// Builds labels with the default landmark order.
    pub fn build(g: &Graph) -> Self {
        Self::build_with_order(g, landmark_order(g))
    }

    pub fn build_with_order(g: &Graph, order: Vec<VertexId>) -> Self {
        let n = g.vertex_count();
        assert_eq!(order.len(), n, "landmark order must cover every vertex");
        let mut search = PrunedSearch::new(n);
        let mut out_tmp: Vec<Vec<RankEntry>> = vec![Vec::new(); n];
        let mut in_tmp: Vec<Vec<RankEntry>> = vec![Vec::new(); n];
        for (rank, &root) in order.iter().enumerate() {
            let rank = rank as u32;
            if g.is_directed() {
                let root_out = out_tmp[root as usize].clone();
                search.run(g, root, rank, true, &root_out, &mut in_tmp);
                let root_in = in_tmp[root as usize].clone();
                search.run(g, root, rank, false, &root_in, &mut out_tmp);
            } else {
                let root_label = out_tmp[root as usize].clone();
                search.run(g, root, rank, true, &root_label, &mut out_tmp);
            }
        }
        LabelIndex {
            directed: g.is_directed(),
            out_labels: finalize(out_tmp, &order),
            in_labels: if g.is_directed() {
                finalize(in_tmp, &order)
            } else {
                Vec::new()
            },
            landmark_order: order,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.out_labels.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn landmark_order(&self) -> &[VertexId] {
        &self.landmark_order
    }

    pub fn avg_out_size(&self) -> f64 {
        avg_len(&self.out_labels)
    }

    pub fn avg_in_size(&self) -> f64 {
        if self.directed {
            avg_len(&self.in_labels)
        } else {
            avg_len(&self.out_labels)
        }
    }

    pub fn total_entries(&self) -> usize {
        self.out_labels.iter().map(Vec::len).sum::<usize>()
            + self.in_labels.iter().map(Vec::len).sum::<usize>()
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidVertex(v))
        }
    }

    /// Vertices of a shortest `s → t` path, unrolled through the minimizing
    /// hub. `None` when `t` is unreachable.
    pub fn reconstruct_path(&self, s: VertexId, t: VertexId) -> Option<Vec<VertexId>> {
        if s == t {
            return Some(vec![s]);
        }
        let (_, hub) = join(self.out_label(s), self.in_label(t))?;
        let limit = self.vertex_count();
        let mut path = vec![s];
        let mut cur = s;
        while cur != hub {
            cur = find_hub(self.out_label(cur), hub)?.parent;
            path.push(cur);
            if path.len() > limit {
                return None;
            }
        }
        let mut tail = vec![t];
        let mut cur = t;
        while cur != hub {
            cur = find_hub(self.in_label(cur), hub)?.parent;
            tail.push(cur);
            if tail.len() > limit {
                return None;
            }
        }
        path.extend(tail.into_iter().rev().skip(1));
        Some(path)
    }

    /// Concatenates the shortest paths between consecutive witness vertices.
    pub fn expand_witness(&self, witness: &[VertexId]) -> Result<Vec<VertexId>> {
        let Some(&first) = witness.first() else {
            return Ok(Vec::new());
        };
        self.check(first)?;
        let mut route = vec![first];
        for pair in witness.windows(2) {
            self.check(pair[1])?;
            let leg = self
                .reconstruct_path(pair[0], pair[1])
                .ok_or(Error::Unreachable {
                    from: pair[0],
                    to: pair[1],
                })?;
            route.extend_from_slice(&leg[1..]);
        }
        Ok(route)
    }

    const MAGIC: [u8; 8] = *b"KOSRLBL\0";
    const VERSION: u32 = 1;

    /// Header (magic, version, vertex count, flags), the landmark order,
    /// then per-vertex entry counts each followed by `(hub, dist, parent)`
    /// triples; out-labels first, in-labels after when directed.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&Self::MAGIC)?;
        put_u32(w, Self::VERSION)?;
        put_u32(w, self.vertex_count() as u32)?;
        put_u32(w, self.directed as u32)?;
        for &v in &self.landmark_order {
            put_u32(w, v)?;
        }
        for list in self.out_labels.iter().chain(&self.in_labels) {
            write_label(w, list)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        expect_magic(r, &Self::MAGIC)?;
        expect_version(r, Self::VERSION)?;
        let n = get_u32(r)? as usize;
        let directed = get_u32(r)? != 0;
        let landmark_order = (0..n).map(|_| get_u32(r)).collect::<Result<Vec<_>, _>>()?;
        let out_labels = (0..n).map(|_| read_label(r)).collect::<Result<Vec<_>>>()?;
        let in_labels = if directed {
            (0..n).map(|_| read_label(r)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(LabelIndex {
            directed,
            out_labels,
            in_labels,
            landmark_order,
        })
    }
}

fn avg_len(lists: &[Vec<LabelEntry>]) -> f64 {
    if lists.is_empty() {
        0.0
    } else {
        lists.iter().map(Vec::len).sum::<usize>() as f64 / lists.len() as f64
    }
}

pub(crate) fn write_label(w: &mut impl Write, list: &[LabelEntry]) -> Result<()> {
    put_u32(w, list.len() as u32)?;
    for e in list {
        put_u32(w, e.hub)?;
        put_u64(w, e.dist)?;
        put_u32(w, e.parent)?;
    }
    Ok(())
}

pub(crate) fn read_label(r: &mut impl Read) -> Result<Vec<LabelEntry>> {
    let len = get_u32(r)? as usize;
    let mut list = Vec::with_capacity(len);
    for _ in 0..len {
        list.push(LabelEntry {
            hub: get_u32(r)?,
            dist: get_u64(r)?,
            parent: get_u32(r)?,
        });
    }
    if list.windows(2).any(|p| p[0].hub >= p[1].hub) {
        return Err(Error::Corrupt("label list not sorted by hub".into()));
    }
    Ok(list)
}

impl LabelLookup for LabelIndex {
    fn vertex_count(&self) -> usize {
        self.out_labels.len()
    }

    fn out_label(&self, v: VertexId) -> &[LabelEntry] {
        &self.out_labels[v as usize]
    }

    fn in_label(&self, v: VertexId) -> &[LabelEntry] {
        if self.directed {
            &self.in_labels[v as usize]
        } else {
            &self.out_labels[v as usize]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dijkstra::{distances, Direction};
    use crate::fixtures::random_digraph;

    #[test]
    fn single_vertex_has_self_hub() {
        let g = Graph::from_arcs(1, [], true).unwrap();
        let idx = LabelIndex::build(&g);
        let me = LabelEntry {
            hub: 0,
            dist: 0,
            parent: 0,
        };
        assert_eq!(idx.out_label(0), &[me]);
        assert_eq!(idx.in_label(0), &[me]);
        assert_eq!(idx.dist(0, 0), Some(0));
    }

    #[test]
    fn two_components_are_unreachable() {
        let g = Graph::from_arcs(4, [(0, 1, 3), (2, 3, 4)], false).unwrap();
        let idx = LabelIndex::build(&g);
        assert_eq!(idx.dist(0, 1), Some(3));
        assert_eq!(idx.dist(1, 0), Some(3));
        assert_eq!(idx.dist(0, 3), None);
        assert_eq!(idx.reconstruct_path(0, 3), None);
        assert!(matches!(
            idx.expand_witness(&[0, 2]),
            Err(Error::Unreachable { from: 0, to: 2 })
        ));
    }

    fn path_cost(g: &Graph, path: &[VertexId]) -> Option<Cost> {
        path.windows(2).map(|p| g.arc_weight(p[0], p[1])).sum()
    }

    #[test]
    fn labels_match_dijkstra_and_paths_are_walks() {
        for seed in 0..8 {
            for directed in [true, false] {
                let g = random_digraph(seed, 60, 150, 1..=20, directed);
                let idx = LabelIndex::build(&g);
                for s in 0..g.vertex_count() as VertexId {
                    let truth = distances(&g, s, Direction::Forward);
                    for t in 0..g.vertex_count() as VertexId {
                        assert_eq!(idx.dist(s, t), truth[t as usize], "seed {seed} {s}->{t}");
                        if let Some(path) = idx.reconstruct_path(s, t) {
                            assert_eq!(path.first(), Some(&s));
                            assert_eq!(path.last(), Some(&t));
                            assert_eq!(path_cost(&g, &path), truth[t as usize]);
                        } else {
                            assert!(truth[t as usize].is_none());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_weight_arcs_and_self_loops() {
        let g = Graph::from_arcs(
            4,
            [(0, 1, 0), (1, 0, 0), (1, 2, 0), (2, 2, 5), (2, 3, 1)],
            true,
        )
        .unwrap();
        let idx = LabelIndex::build(&g);
        for s in 0..4 {
            let truth = distances(&g, s, Direction::Forward);
            for t in 0..4 {
                assert_eq!(idx.dist(s, t), truth[t as usize]);
            }
        }
        assert_eq!(idx.reconstruct_path(0, 0), Some(vec![0]));
    }

    #[test]
    fn stored_distances_are_exact() {
        let g = random_digraph(3, 50, 120, 1..=9, true);
        let idx = LabelIndex::build(&g);
        for v in 0..g.vertex_count() as VertexId {
            let from_v = distances(&g, v, Direction::Forward);
            let to_v = distances(&g, v, Direction::Backward);
            for e in idx.out_label(v) {
                assert_eq!(Some(e.dist), from_v[e.hub as usize]);
            }
            for e in idx.in_label(v) {
                assert_eq!(Some(e.dist), to_v[e.hub as usize]);
            }
            let own = find_hub(idx.out_label(v), v);
            if let Some(own) = own {
                assert_eq!((own.dist, own.parent), (0, v));
            }
        }
    }

    #[test]
    fn expand_witness_sums_legs() {
        let g = random_digraph(5, 40, 120, 1..=30, true);
        let idx = LabelIndex::build(&g);
        let witness = [0, 7, 7, 13, 21];
        if let Ok(route) = idx.expand_witness(&witness) {
            let legs: Option<Cost> = witness.windows(2).map(|p| idx.dist(p[0], p[1])).sum();
            assert_eq!(path_cost(&g, &route), legs);
            assert_eq!(route[0], 0);
            assert_eq!(*route.last().unwrap(), 21);
        }
        assert_eq!(idx.expand_witness(&[4]).unwrap(), vec![4]);
    }

    #[test]
    fn deterministic_and_serializable() {
        let g = random_digraph(9, 70, 200, 1..=50, true);
        let a = LabelIndex::build(&g);
        let b = LabelIndex::build(&g);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_to(&mut x).unwrap();
        b.write_to(&mut y).unwrap();
        assert_eq!(x, y);
        assert_eq!(LabelIndex::read_from(&mut x.as_slice()).unwrap(), a);
        let mut bad = x.clone();
        bad[0] = b'X';
        assert!(LabelIndex::read_from(&mut bad.as_slice()).is_err());
    }
}

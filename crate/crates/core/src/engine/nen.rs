//! Nearest estimated neighbors: members `u` of a category ordered by
//! `dis(v, u) + dis(u, t)`, built lazily on top of plain nearest neighbors.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::source::{NeighborSource, Slot};
use crate::{Cost, VertexId};

/// A produced estimated neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Estimated {
    pub vertex: VertexId,
    /// `dis(v, vertex)`
    pub dist: Cost,
    /// `dis(v, vertex) + dis(vertex, t)`
    pub estimate: Cost,
}

#[derive(Debug, Default)]
struct NenCursor {
    enl: Vec<Estimated>,
    enq: BinaryHeap<Reverse<(Cost, VertexId, Cost)>>,
    fetched: usize,
    last_dist: Cost,
    exhausted: bool,
}

#[derive(Debug, Default)]
pub struct NenCursors {
    cursors: HashMap<(VertexId, Slot), NenCursor>,
}

impl NenCursors {
    pub fn new() -> Self {
        Self::default()
    }

    /// The `x`-th (1-based) member of `slot` by estimated cost from `v`,
    /// ties by vertex id. Members that cannot reach the destination are
    /// skipped.
    pub fn find_nen<S: NeighborSource + ?Sized>(
        &mut self,
        source: &mut S,
        v: VertexId,
        slot: Slot,
        x: usize,
    ) -> Option<Estimated> {
        assert!(x >= 1, "ranks start at 1");
        let cursor = self.cursors.entry((v, slot)).or_default();
        while cursor.enl.len() < x {
            // pull plain neighbors until the queue head beats every unseen one
            loop {
                if let Some(&Reverse((best, _, _))) = cursor.enq.peek() {
                    if cursor.exhausted || (cursor.fetched > 0 && cursor.last_dist > best) {
                        break;
                    }
                } else if cursor.exhausted {
                    return None;
                }
                match source.nearest(v, slot, cursor.fetched + 1) {
                    None => cursor.exhausted = true,
                    Some((u, d)) => {
                        cursor.fetched += 1;
                        cursor.last_dist = d;
                        if let Some(h) = source.to_target(u) {
                            cursor.enq.push(Reverse((d + h, u, d)));
                        }
                    }
                }
            }
            let Reverse((estimate, vertex, dist)) =
                cursor.enq.pop().expect("queue checked non-empty");
            cursor.enl.push(Estimated {
                vertex,
                dist,
                estimate,
            });
        }
        Some(cursor.enl[x - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dijkstra::{distances, Direction};
    use crate::engine::source::{DijkstraNeighbors, LabelNeighbors};
    use crate::fixtures::{fixture_fig1, random_instance};
    use crate::inverted::InvertedLabelIndex;
    use crate::labeling::LabelIndex;
    use crate::CategoryId;

    #[test]
    fn fig1_estimated_neighbors_of_s() {
        let f = fixture_fig1();
        let labels = LabelIndex::build(&f.graph);
        let il = InvertedLabelIndex::build(&labels, &f.categories);
        let mut src = LabelNeighbors::new(&labels, &il, f.v("t"), None);
        let mut nen = NenCursors::new();
        let ma = Slot::Category(f.c("MA"));
        let first = nen.find_nen(&mut src, f.v("s"), ma, 1).unwrap();
        assert_eq!(
            (first.vertex, first.dist, first.estimate),
            (f.v("c"), 10, 17)
        );
        let second = nen.find_nen(&mut src, f.v("s"), ma, 2).unwrap();
        assert_eq!((second.vertex, second.estimate), (f.v("a"), 20));
        assert_eq!(nen.find_nen(&mut src, f.v("s"), ma, 3), None);
    }

    #[test]
    fn matches_sorted_estimates() {
        for seed in 0..10 {
            let inst = random_instance(seed, 50, 4, 5);
            let t = inst.query.target;
            let to_t = distances(&inst.graph, t, Direction::Backward);
            let mut src = DijkstraNeighbors::new(&inst.graph, &inst.categories, t, None);
            let mut nen = NenCursors::new();
            for v in 0..inst.graph.vertex_count() as VertexId {
                let from_v = distances(&inst.graph, v, Direction::Forward);
                for c in 0..inst.categories.category_count() as CategoryId {
                    let mut expected: Vec<(Cost, VertexId)> = inst
                        .categories
                        .members(c)
                        .iter()
                        .filter_map(|&u| Some((from_v[u as usize]? + to_t[u as usize]?, u)))
                        .collect();
                    expected.sort();
                    let got: Vec<(Cost, VertexId)> = (1..)
                        .map_while(|x| nen.find_nen(&mut src, v, Slot::Category(c), x))
                        .map(|e| (e.estimate, e.vertex))
                        .collect();
                    assert_eq!(got, expected, "seed {seed} v {v} c {c}");
                }
            }
        }
    }

    #[test]
    fn singleton_category() {
        let f = fixture_fig1();
        let mut cm = f.categories.clone();
        let solo = cm.add_category("SOLO");
        cm.insert(f.v("e"), solo).unwrap();
        let mut src = DijkstraNeighbors::new(&f.graph, &cm, f.v("t"), None);
        let got = NenCursors::new()
            .find_nen(&mut src, f.v("a"), Slot::Category(solo), 1)
            .unwrap();
        // dis(a, e) + dis(e, t)
        assert_eq!(got.estimate, 6 + 7);
    }
}

//! Test fixtures: the eight-vertex running example and seeded random
//! instances for cross-checking the engines against the brute-force oracle.

use std::ops::RangeInclusive;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CategoryMap, CategorySequence, Graph, VertexNames};
use crate::labeling::{join, LabelEntry};
use crate::{CategoryId, Cost, VertexId};

/// The running example: a complete digraph over `s a b c d e f t` whose arc
/// weights are the example network's pairwise shortest distances, with
/// categories MA = {a, c}, RE = {b, e}, CI = {d, f}.
#[derive(Debug, Clone)]
pub struct Fig1 {
    pub graph: Graph,
    pub categories: CategoryMap,
    pub names: VertexNames,
}

pub const FIG1_VERTICES: [&str; 8] = ["s", "a", "b", "c", "d", "e", "f", "t"];

// Published 2-hop labels of the example network: (vertex, L_in, L_out).
type NamedLabel = &'static [(&'static str, Cost)];
const FIG1_LABELS: [(&str, NamedLabel, NamedLabel); 8] = [
    (
        "a",
        &[("a", 0), ("s", 8), ("t", 33)],
        &[("a", 0), ("b", 5), ("e", 6), ("s", 10), ("t", 12)],
    ),
    (
        "b",
        &[("b", 0), ("s", 13), ("t", 20)],
        &[("b", 0), ("s", 5), ("t", 7)],
    ),
    (
        "c",
        &[("c", 0), ("s", 10), ("t", 15)],
        &[("b", 5), ("c", 0), ("d", 3), ("s", 10), ("t", 7)],
    ),
    (
        "d",
        &[("b", 3), ("d", 0), ("e", 3), ("s", 13), ("t", 13)],
        &[("d", 0), ("t", 4)],
    ),
    (
        "e",
        &[("e", 0), ("s", 14), ("t", 10)],
        &[("e", 0), ("t", 7)],
    ),
    (
        "f",
        &[("e", 10), ("f", 0), ("s", 24), ("t", 20)],
        &[("f", 0), ("t", 3)],
    ),
    ("s", &[("s", 0), ("t", 25)], &[("s", 0), ("t", 17)]),
    ("t", &[("t", 0)], &[("t", 0)]),
];

fn fig1_id(name: &str) -> VertexId {
    FIG1_VERTICES.iter().position(|v| *v == name).unwrap() as VertexId
}

fn to_label(entries: NamedLabel) -> Vec<LabelEntry> {
    let mut out: Vec<LabelEntry> = entries
        .iter()
        .map(|&(hub, dist)| LabelEntry {
            hub: fig1_id(hub),
            dist,
            parent: fig1_id(hub),
        })
        .collect();
    out.sort_by_key(|e| e.hub);
    out
}

/// Pairwise distances of the example network, joined from its published labels.
pub fn fig1_distances() -> Vec<Vec<Option<Cost>>> {
    let mut labels = vec![(Vec::new(), Vec::new()); FIG1_VERTICES.len()];
    for (v, l_in, l_out) in FIG1_LABELS {
        labels[fig1_id(v) as usize] = (to_label(l_in), to_label(l_out));
    }
    (0..FIG1_VERTICES.len())
        .map(|s| {
            (0..FIG1_VERTICES.len())
                .map(|t| {
                    if s == t {
                        Some(0)
                    } else {
                        join(&labels[s].1, &labels[t].0).map(|(d, _)| d)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn fixture_fig1() -> Fig1 {
    let dist = fig1_distances();
    let mut arcs = Vec::new();
    for (s, row) in dist.iter().enumerate() {
        for (t, d) in row.iter().enumerate() {
            if s != t {
                if let Some(d) = d {
                    arcs.push((s as VertexId, t as VertexId, *d));
                }
            }
        }
    }
    let n = FIG1_VERTICES.len();
    let graph = Graph::from_arcs(n, arcs, true).expect("fixture arcs are in range");
    let mut names = VertexNames::new();
    for v in FIG1_VERTICES {
        names.intern(v);
    }
    let categories = CategoryMap::from_members(
        n,
        &[
            ("MA", vec![fig1_id("a"), fig1_id("c")]),
            ("RE", vec![fig1_id("b"), fig1_id("e")]),
            ("CI", vec![fig1_id("d"), fig1_id("f")]),
        ],
    )
    .expect("fixture categories are valid");
    Fig1 {
        graph,
        categories,
        names,
    }
}

impl Fig1 {
    pub fn v(&self, name: &str) -> VertexId {
        self.names.resolve(name).expect("fixture vertex")
    }

    pub fn c(&self, name: &str) -> CategoryId {
        self.categories.resolve(name).expect("fixture category")
    }

    pub fn sequence(&self, names: &[&str]) -> CategorySequence {
        CategorySequence::from_names(names, &self.categories).expect("fixture sequence")
    }

    pub fn witness(&self, names: &[&str]) -> Vec<VertexId> {
        names.iter().map(|n| self.v(n)).collect()
    }

    pub fn edge_list(&self) -> String {
        self.graph
            .arcs()
            .map(|(u, v, w)| format!("{} {} {}\n", self.names.name(u), self.names.name(v), w))
            .collect()
    }

    pub fn category_list(&self) -> String {
        let mut out = Vec::new();
        crate::graph::write_categories(&mut out, &self.categories, &self.names).unwrap();
        String::from_utf8(out).unwrap()
    }
}

/// Random digraph with `n` vertices and about `m` extra arcs on top of a
/// sparse random backbone, weights drawn from `weights`.
pub fn random_digraph(
    seed: u64,
    n: usize,
    m: usize,
    weights: RangeInclusive<Cost>,
    directed: bool,
) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::with_capacity(m + n);
    if n > 1 {
        // a random cycle over most vertices keeps large parts mutually reachable
        let mut perm: Vec<VertexId> = (0..n as VertexId).collect();
        perm.shuffle(&mut rng);
        let keep = n - n / 8;
        for i in 0..keep {
            let (u, v) = (perm[i], perm[(i + 1) % keep]);
            arcs.push((u, v, rng.random_range(weights.clone())));
        }
        for _ in 0..m {
            let u = rng.random_range(0..n as VertexId);
            let v = rng.random_range(0..n as VertexId);
            arcs.push((u, v, rng.random_range(weights.clone())));
        }
    }
    Graph::from_arcs(n, arcs, directed).expect("generated arcs are in range")
}

/// Undirected preferential-attachment graph: each new vertex links to `links`
/// earlier vertices picked in proportion to their degree.
pub fn preferential_graph(
    seed: u64,
    n: usize,
    links: usize,
    weights: RangeInclusive<Cost>,
) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::with_capacity(n * links);
    // every arc endpoint, so a uniform pick is degree-proportional
    let mut ends: Vec<VertexId> = Vec::with_capacity(2 * n * links);
    for v in 1..n as VertexId {
        let mut picked: Vec<VertexId> = Vec::with_capacity(links);
        for _ in 0..links.min(v as usize) {
            let u = loop {
                let u = if ends.is_empty() {
                    0
                } else {
                    ends[rng.random_range(0..ends.len())]
                };
                if !picked.contains(&u) {
                    break u;
                }
                if picked.len() as VertexId >= v {
                    break rng.random_range(0..v);
                }
            };
            picked.push(u);
        }
        for &u in &picked {
            arcs.push((v, u, rng.random_range(weights.clone())));
            ends.extend([u, v]);
        }
    }
    Graph::from_arcs(n, arcs, false).expect("generated arcs are in range")
}

#[derive(Debug, Clone)]
pub struct RandomQuery {
    pub source: VertexId,
    pub target: VertexId,
    pub sequence: CategorySequence,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub graph: Graph,
    pub categories: CategoryMap,
    pub query: RandomQuery,
}

/// Small seeded instance: up to 60 vertices, up to 4 categories of up to 5
/// members (a vertex may sit in several), and a query with `k ≤ 5`.
pub fn random_instance(
    seed: u64,
    max_vertices: usize,
    max_categories: usize,
    max_members: usize,
) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b6f_7372);
    let n = rng.random_range(8.max(max_vertices / 4)..=max_vertices.max(8));
    let m = rng.random_range(n..=3 * n);
    let directed = rng.random_bool(0.8);
    let graph = random_digraph(rng.random(), n, m, 1..=100, directed);

    let num_categories = rng.random_range(1..=max_categories.max(1));
    let mut categories = CategoryMap::new(n);
    let all: Vec<VertexId> = (0..n as VertexId).collect();
    for i in 0..num_categories {
        let c = categories.add_category(&format!("C{i}"));
        let size = rng.random_range(1..=max_members.max(1));
        for &v in all.choose_multiple(&mut rng, size) {
            categories.insert(v, c).expect("vertex in range");
        }
    }

    let len = rng.random_range(1..=max_categories.max(1));
    let seq: Vec<CategoryId> = (0..len)
        .map(|_| rng.random_range(0..num_categories as CategoryId))
        .collect();
    let sequence = CategorySequence::new(seq, &categories).expect("generated categories exist");
    let query = RandomQuery {
        source: rng.random_range(0..n as VertexId),
        target: rng.random_range(0..n as VertexId),
        sequence,
        k: rng.random_range(1..=5),
    };
    RandomInstance {
        graph,
        categories,
        query,
    }
}

//! KOSR query engines.
//!
//! All three algorithms share one best-first loop over partial witnesses:
//!
//! * `kpne` extends every extracted route by its nearest neighbor in the
//!   next category and spawns a sibling through the previous vertex's next
//!   nearest neighbor.
//! * `pk` additionally parks a route when another route of the same length
//!   was already extended at the same vertex, and releases the cheapest
//!   parked route once a result passes through the dominating prefix.
//! * `sk` orders everything by `cost + dis(last, t)` and draws siblings from
//!   the nearest *estimated* neighbors.
//!
//! Each comes with a `-dij` variant that finds neighbors by Dijkstra search
//! instead of the label index.

mod nen;
pub mod oracle;
mod search;
mod source;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use nen::{Estimated, NenCursors};
pub use oracle::oracle_topk;
pub use source::{dijkstra_nn, DijkstraNeighbors, Filter, LabelNeighbors, NeighborSource, Slot};

use crate::error::{Error, Result};
use crate::graph::{CategoryMap, Graph};
use crate::inverted::CategoryLookup;
use crate::labeling::LabelLookup;
use crate::{CategoryId, Cost, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Kpne,
    Pruning,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Labels,
    Dijkstra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Engine {
    pub algorithm: Algorithm,
    pub backend: Backend,
}

impl Engine {
    pub const KPNE: Engine = Engine {
        algorithm: Algorithm::Kpne,
        backend: Backend::Labels,
    };
    pub const PK: Engine = Engine {
        algorithm: Algorithm::Pruning,
        backend: Backend::Labels,
    };
    pub const SK: Engine = Engine {
        algorithm: Algorithm::Star,
        backend: Backend::Labels,
    };
    pub const KPNE_DIJ: Engine = Engine {
        algorithm: Algorithm::Kpne,
        backend: Backend::Dijkstra,
    };
    pub const PK_DIJ: Engine = Engine {
        algorithm: Algorithm::Pruning,
        backend: Backend::Dijkstra,
    };
    pub const SK_DIJ: Engine = Engine {
        algorithm: Algorithm::Star,
        backend: Backend::Dijkstra,
    };

    pub const ALL: [Engine; 6] = [
        Self::KPNE,
        Self::PK,
        Self::SK,
        Self::KPNE_DIJ,
        Self::PK_DIJ,
        Self::SK_DIJ,
    ];

    pub fn name(self) -> &'static str {
        match (self.algorithm, self.backend) {
            (Algorithm::Kpne, Backend::Labels) => "kpne",
            (Algorithm::Pruning, Backend::Labels) => "pk",
            (Algorithm::Star, Backend::Labels) => "sk",
            (Algorithm::Kpne, Backend::Dijkstra) => "kpne-dij",
            (Algorithm::Pruning, Backend::Dijkstra) => "pk-dij",
            (Algorithm::Star, Backend::Dijkstra) => "sk-dij",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown engine {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub source: VertexId,
    pub target: VertexId,
    pub sequence: Vec<CategoryId>,
    pub k: usize,
}

impl Query {
    pub fn new(
        source: VertexId,
        target: VertexId,
        sequence: impl Into<Vec<CategoryId>>,
        k: usize,
    ) -> Self {
        Query {
            source,
            target,
            sequence: sequence.into(),
            k,
        }
    }
}

#[derive(Clone, Copy, Default)]
pub struct QueryOptions<'a> {
    /// Record every queue operation in [`QueryOutcome::trace`].
    pub trace: bool,
    pub deadline: Option<Instant>,
    /// Restricts which category members may be used as neighbors.
    pub filter: Option<Filter<'a>>,
}

impl QueryOptions<'_> {
    pub fn traced() -> Self {
        QueryOptions {
            trace: true,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Witness {
    pub vertices: Vec<VertexId>,
    pub cost: Cost,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Frontier extractions.
    pub examined_routes: u64,
    /// Routes extended through their nearest neighbor.
    pub extended_routes: u64,
    /// Nearest-neighbor searches that were not served from a cursor cache.
    pub nn_queries: u64,
    pub runtime: Duration,
    pub result_costs: Vec<Cost>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Extracted {
        witness: Vec<VertexId>,
        key: Cost,
        rank: Option<u32>,
    },
    Inserted {
        witness: Vec<VertexId>,
        key: Cost,
        rank: Option<u32>,
    },
    Parked {
        witness: Vec<VertexId>,
        key: Cost,
    },
    Extended {
        witness: Vec<VertexId>,
    },
    Reinserted {
        witness: Vec<VertexId>,
        key: Cost,
    },
    Emitted {
        witness: Vec<VertexId>,
        cost: Cost,
    },
    DuplicateDiscarded {
        witness: Vec<VertexId>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct QueryOutcome {
    pub witnesses: Vec<Witness>,
    pub stats: QueryStats,
    pub trace: Vec<TraceEvent>,
}

/// Runs `algorithm` with an arbitrary neighbor source. Vertex and category
/// validation is the caller's job.
pub fn run_with_source<S: NeighborSource + ?Sized>(
    source: &mut S,
    algorithm: Algorithm,
    query: &Query,
    options: &QueryOptions<'_>,
) -> Result<QueryOutcome> {
    if query.k == 0 {
        return Err(Error::InvalidK);
    }
    search::search(
        source,
        algorithm,
        query.source,
        &query.sequence,
        query.k,
        options.deadline,
        options.trace,
    )
}

fn check_vertices(query: &Query, n: usize) -> Result<()> {
    for v in [query.source, query.target] {
        if v as usize >= n {
            return Err(Error::InvalidVertex(v));
        }
    }
    if query.sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(())
}

/// Label-backed query (`kpne`, `pk`, `sk`).
pub fn run_labels<L, I>(
    labels: &L,
    inverted: &I,
    algorithm: Algorithm,
    query: &Query,
    options: &QueryOptions<'_>,
) -> Result<QueryOutcome>
where
    L: LabelLookup + ?Sized,
    I: CategoryLookup + ?Sized,
{
    check_vertices(query, labels.vertex_count())?;
    if let Some(&c) = query
        .sequence
        .iter()
        .find(|&&c| inverted.inverted(c).is_none())
    {
        return Err(Error::UnknownCategory(c));
    }
    let mut source = LabelNeighbors::new(labels, inverted, query.target, options.filter);
    run_with_source(&mut source, algorithm, query, options)
}

/// Dijkstra-backed query (`kpne-dij`, `pk-dij`, `sk-dij`).
pub fn run_dijkstra(
    graph: &Graph,
    categories: &CategoryMap,
    algorithm: Algorithm,
    query: &Query,
    options: &QueryOptions<'_>,
) -> Result<QueryOutcome> {
    check_vertices(query, graph.vertex_count())?;
    for &c in &query.sequence {
        categories.check(c)?;
    }
    let mut source = DijkstraNeighbors::new(graph, categories, query.target, options.filter);
    run_with_source(&mut source, algorithm, query, options)
}

pub fn kpne<L, I>(labels: &L, inverted: &I, query: &Query) -> Result<(Vec<Witness>, QueryStats)>
where
    L: LabelLookup + ?Sized,
    I: CategoryLookup + ?Sized,
{
    let out = run_labels(
        labels,
        inverted,
        Algorithm::Kpne,
        query,
        &QueryOptions::default(),
    )?;
    Ok((out.witnesses, out.stats))
}

pub fn pruning_kosr<L, I>(
    labels: &L,
    inverted: &I,
    query: &Query,
) -> Result<(Vec<Witness>, QueryStats)>
where
    L: LabelLookup + ?Sized,
    I: CategoryLookup + ?Sized,
{
    let out = run_labels(
        labels,
        inverted,
        Algorithm::Pruning,
        query,
        &QueryOptions::default(),
    )?;
    Ok((out.witnesses, out.stats))
}

pub fn star_kosr<L, I>(
    labels: &L,
    inverted: &I,
    query: &Query,
) -> Result<(Vec<Witness>, QueryStats)>
where
    L: LabelLookup + ?Sized,
    I: CategoryLookup + ?Sized,
{
    let out = run_labels(
        labels,
        inverted,
        Algorithm::Star,
        query,
        &QueryOptions::default(),
    )?;
    Ok((out.witnesses, out.stats))
}

/// The search-space bounds `(M, N)` on examined and extended routes for a
/// dominance-pruned query, with the source and destination counted as
/// singleton categories.
pub fn pruning_bounds(sizes: &[usize], k: usize) -> (u64, u64) {
    let mut all = Vec::with_capacity(sizes.len() + 2);
    all.push(1u64);
    all.extend(sizes.iter().map(|&s| s as u64));
    all.push(1);
    let j = sizes.len();
    let k1 = k.saturating_sub(1) as u64;
    let pairs: u64 = all.windows(2).map(|w| w[0] * w[1]).sum();
    let tail: u64 = all[2..].iter().sum();
    let m = pairs + k1 * tail;
    let n = all[..=j].iter().sum::<u64>() + k1 * j as u64;
    (m, n)
}

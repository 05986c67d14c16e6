//! Top-k optimal sequenced route queries over directed weighted graphs.
//!
//! A query `(s, t, C, k)` asks for the `k` cheapest witnesses
//! `⟨s, v1, .., vj, t⟩` where `vi` belongs to category `C[i]`. Distances come
//! from a pruned 2-hop label index; per-category inverted label lists turn it
//! into an incremental nearest-neighbor source for the search engines.

pub mod bench;
mod codec;
pub mod dijkstra;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod index;
pub mod inverted;
pub mod labeling;
pub mod store;

pub type VertexId = u32;
pub type CategoryId = u32;
pub type Cost = u64;

pub use engine::{
    Algorithm, Backend, Engine, Query, QueryOptions, QueryOutcome, QueryStats, Witness,
};
pub use error::{Error, Result};
pub use graph::{CategoryMap, CategorySequence, Graph, VertexNames};
pub use index::KosrIndex;
pub use inverted::{CategoryInvertedIndex, InvertedLabelIndex, NnCursors};
pub use labeling::{LabelIndex, LabelLookup};
pub use store::{IndexStore, UpdateOp};

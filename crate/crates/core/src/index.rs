//! An in-memory bundle of everything a query needs.

use crate::engine::{self, Backend, Engine, Query, QueryOptions, QueryOutcome};
use crate::error::Result;
use crate::graph::{CategoryMap, CategorySequence, Graph, VertexNames};
use crate::inverted::{self, InvertedLabelIndex, NnCursors};
use crate::labeling::LabelIndex;
use crate::{CategoryId, Cost, VertexId};

#[derive(Debug, Clone)]
pub struct KosrIndex {
    pub graph: Graph,
    pub names: VertexNames,
    pub categories: CategoryMap,
    pub labels: LabelIndex,
    pub inverted: InvertedLabelIndex,
}

impl KosrIndex {
    pub fn build(graph: Graph, names: VertexNames, categories: CategoryMap) -> Self {
        let labels = LabelIndex::build(&graph);
        let inverted = InvertedLabelIndex::build(&labels, &categories);
        KosrIndex {
            graph,
            names,
            categories,
            labels,
            inverted,
        }
    }

    pub fn query(
        &self,
        engine: Engine,
        query: &Query,
        options: &QueryOptions<'_>,
    ) -> Result<QueryOutcome> {
        match engine.backend {
            Backend::Labels => engine::run_labels(
                &self.labels,
                &self.inverted,
                engine.algorithm,
                query,
                options,
            ),
            Backend::Dijkstra => engine::run_dijkstra(
                &self.graph,
                &self.categories,
                engine.algorithm,
                query,
                options,
            ),
        }
    }

    /// Builds a query from vertex and category names.
    pub fn named_query<S: AsRef<str>>(
        &self,
        source: &str,
        target: &str,
        sequence: &[S],
        k: usize,
    ) -> Result<Query> {
        let seq = CategorySequence::from_names(sequence, &self.categories)?;
        Ok(Query::new(
            self.names.resolve(source)?,
            self.names.resolve(target)?,
            seq.as_slice(),
            k,
        ))
    }

    pub fn find_nn(
        &self,
        v: VertexId,
        c: CategoryId,
        x: usize,
    ) -> Result<Option<(VertexId, Cost)>> {
        self.categories.check(c)?;
        self.check_vertex(v)?;
        Ok(inverted::find_nn(
            &mut NnCursors::new(),
            &self.labels,
            &self.inverted,
            v,
            c,
            x,
        ))
    }

    pub fn add_vertex_category(&mut self, v: VertexId, c: CategoryId) -> Result<bool> {
        inverted::add_vertex_category(&mut self.categories, &mut self.inverted, &self.labels, v, c)
    }

    pub fn remove_vertex_category(&mut self, v: VertexId, c: CategoryId) -> Result<bool> {
        inverted::remove_vertex_category(
            &mut self.categories,
            &mut self.inverted,
            &self.labels,
            v,
            c,
        )
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.graph.contains(v) {
            Ok(())
        } else {
            Err(crate::Error::InvalidVertex(v))
        }
    }
}

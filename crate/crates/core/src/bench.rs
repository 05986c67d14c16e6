//! Batch benchmarking: random queries, per-engine averages, timeouts.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Engine, Query, QueryOptions};
use crate::error::{Error, Result};
use crate::index::KosrIndex;
use crate::{CategoryId, Cost, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    /// Categories per query.
    pub sequence_len: usize,
    pub k: usize,
    pub engines: Vec<Engine>,
    pub num_queries: usize,
    pub seed: u64,
    pub timeout: Duration,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            sequence_len: 3,
            k: 10,
            engines: vec![Engine::PK, Engine::SK],
            num_queries: 50,
            seed: 0,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub engine: Engine,
    pub query: usize,
    pub examined_routes: u64,
    pub extended_routes: u64,
    pub nn_queries: u64,
    pub runtime: Duration,
    pub timed_out: bool,
    pub costs: Vec<Cost>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineSummary {
    pub engine: Engine,
    pub completed: usize,
    /// Set when any query ran past the timeout.
    pub inf: bool,
    pub mean_runtime: Duration,
    pub mean_examined_routes: f64,
    pub mean_extended_routes: f64,
    pub mean_nn_queries: f64,
    pub total_examined_routes: u64,
    pub total_nn_queries: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub seed: u64,
    pub sequence_len: usize,
    pub k: usize,
    pub timeout: Duration,
    pub mean_category_size: f64,
    pub queries: Vec<Query>,
    pub summaries: Vec<EngineSummary>,
    pub records: Vec<QueryRecord>,
}

/// `num_queries` random `(s, t, C)` triples: `s` and `t` uniform over the
/// vertices, `C` a uniform sample of distinct non-empty categories.
pub fn random_queries(index: &KosrIndex, params: &BenchParams) -> Result<Vec<Query>> {
    let cm = &index.categories;
    let usable: Vec<CategoryId> = (0..cm.category_count() as CategoryId)
        .filter(|&c| cm.size(c) > 0)
        .collect();
    if params.sequence_len == 0 || params.sequence_len > usable.len() {
        return Err(Error::InvalidParameter(format!(
            "need {} non-empty categories, index has {}",
            params.sequence_len,
            usable.len()
        )));
    }
    let n = index.graph.vertex_count() as VertexId;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok((0..params.num_queries)
        .map(|_| {
            let s = rng.random_range(0..n);
            let t = rng.random_range(0..n);
            let seq: Vec<CategoryId> = usable
                .choose_multiple(&mut rng, params.sequence_len)
                .copied()
                .collect();
            Query::new(s, t, seq, params.k)
        })
        .collect())
}

pub fn run_bench(index: &KosrIndex, params: &BenchParams) -> Result<BenchReport> {
    let queries = random_queries(index, params)?;
    run_bench_queries(index, params, queries)
}

/// Runs every engine over the given batch.
pub fn run_bench_queries(
    index: &KosrIndex,
    params: &BenchParams,
    queries: Vec<Query>,
) -> Result<BenchReport> {
    if params.engines.is_empty() {
        return Err(Error::InvalidParameter("no engines selected".into()));
    }
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &engine in &params.engines {
        let mut mine = Vec::with_capacity(queries.len());
        for (i, q) in queries.iter().enumerate() {
            let options = QueryOptions {
                deadline: Some(Instant::now() + params.timeout),
                ..Default::default()
            };
            let start = Instant::now();
            let record = match index.query(engine, q, &options) {
                Ok(out) => QueryRecord {
                    engine,
                    query: i,
                    examined_routes: out.stats.examined_routes,
                    extended_routes: out.stats.extended_routes,
                    nn_queries: out.stats.nn_queries,
                    runtime: out.stats.runtime,
                    timed_out: false,
                    costs: out.stats.result_costs,
                },
                Err(Error::DeadlineExceeded) => QueryRecord {
                    engine,
                    query: i,
                    examined_routes: 0,
                    extended_routes: 0,
                    nn_queries: 0,
                    runtime: start.elapsed(),
                    timed_out: true,
                    costs: Vec::new(),
                },
                Err(e) => return Err(e),
            };
            mine.push(record);
        }
        summaries.push(summarize(engine, &mine));
        records.extend(mine);
    }
    let sizes: Vec<usize> = queries
        .iter()
        .flat_map(|q| q.sequence.iter().map(|&c| index.categories.size(c)))
        .collect();
    Ok(BenchReport {
        seed: params.seed,
        sequence_len: params.sequence_len,
        k: params.k,
        timeout: params.timeout,
        mean_category_size: mean(sizes.iter().map(|&s| s as f64)),
        queries,
        summaries,
        records,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn summarize(engine: Engine, records: &[QueryRecord]) -> EngineSummary {
    let done: Vec<&QueryRecord> = records.iter().filter(|r| !r.timed_out).collect();
    let runtime_total: Duration = done.iter().map(|r| r.runtime).sum();
    EngineSummary {
        engine,
        completed: done.len(),
        inf: done.len() < records.len(),
        mean_runtime: if done.is_empty() {
            Duration::ZERO
        } else {
            runtime_total / done.len() as u32
        },
        mean_examined_routes: mean(done.iter().map(|r| r.examined_routes as f64)),
        mean_extended_routes: mean(done.iter().map(|r| r.extended_routes as f64)),
        mean_nn_queries: mean(done.iter().map(|r| r.nn_queries as f64)),
        total_examined_routes: done.iter().map(|r| r.examined_routes).sum(),
        total_nn_queries: done.iter().map(|r| r.nn_queries).sum(),
    }
}

impl BenchReport {
    pub fn summary(&self, engine: Engine) -> Option<&EngineSummary> {
        self.summaries.iter().find(|s| s.engine == engine)
    }

    /// Copy with every runtime zeroed; what remains depends only on the
    /// seed, the parameters and the index.
    pub fn without_timings(&self) -> BenchReport {
        let mut r = self.clone();
        for s in &mut r.summaries {
            s.mean_runtime = Duration::ZERO;
        }
        for q in &mut r.records {
            q.runtime = Duration::ZERO;
        }
        r
    }

    /// One `key=value` line for the batch, then one per engine.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "bench seed={} queries={} categories={} k={} mean_category_size={:.1} timeout_ms={}",
            self.seed,
            self.queries.len(),
            self.sequence_len,
            self.k,
            self.mean_category_size,
            self.timeout.as_millis()
        );
        for s in &self.summaries {
            let runtime = if s.inf {
                "INF".to_string()
            } else {
                format!("{:.3}", s.mean_runtime.as_secs_f64() * 1e3)
            };
            let _ = writeln!(
                out,
                "engine={} completed={} inf={} mean_runtime_ms={} mean_examined_routes={:.1} \
                 mean_extended_routes={:.1} mean_nn_queries={:.1} total_examined_routes={} total_nn_queries={}",
                s.engine,
                s.completed,
                s.inf,
                runtime,
                s.mean_examined_routes,
                s.mean_extended_routes,
                s.mean_nn_queries,
                s.total_examined_routes,
                s.total_nn_queries
            );
        }
        out
    }

    /// Tab-separated rows, one per engine and query.
    pub fn write_tsv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "engine\tquery\tsource\ttarget\tsequence\tk\tstatus\texamined_routes\textended_routes\tnn_queries\truntime_us\tcosts")?;
        for r in &self.records {
            let q = &self.queries[r.query];
            let seq: Vec<String> = q.sequence.iter().map(u32::to_string).collect();
            let costs: Vec<String> = r.costs.iter().map(u64::to_string).collect();
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.engine,
                r.query,
                q.source,
                q.target,
                seq.join(","),
                q.k,
                if r.timed_out { "INF" } else { "ok" },
                r.examined_routes,
                r.extended_routes,
                r.nn_queries,
                r.runtime.as_micros(),
                costs.join(",")
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_fig1;
    use crate::graph::{assign_uniform_categories, VertexNames};

    fn fig1_index() -> KosrIndex {
        let f = fixture_fig1();
        KosrIndex::build(f.graph, f.names, f.categories)
    }

    #[test]
    fn star_examines_no_more_than_pruning_on_fig1() {
        let index = fig1_index();
        let q = index.named_query("s", "t", &["MA", "RE", "CI"], 2).unwrap();
        let params = BenchParams {
            engines: vec![Engine::PK, Engine::SK],
            ..Default::default()
        };
        let report = run_bench_queries(&index, &params, vec![q]).unwrap();
        let pk = report.summary(Engine::PK).unwrap();
        let sk = report.summary(Engine::SK).unwrap();
        assert!(sk.mean_examined_routes <= pk.mean_examined_routes);
        assert_eq!(
            (pk.total_examined_routes, sk.total_examined_routes),
            (13, 9)
        );
    }

    #[test]
    fn totals_are_sums_and_seeds_reproduce() {
        let index = fig1_index();
        let params = BenchParams {
            sequence_len: 2,
            k: 3,
            num_queries: 20,
            seed: 9,
            engines: Engine::ALL.to_vec(),
            ..Default::default()
        };
        let a = run_bench(&index, &params).unwrap();
        let b = run_bench(&index, &params).unwrap();
        assert_eq!(a.without_timings(), b.without_timings());
        assert_eq!(a.records.len(), 20 * 6);
        for s in &a.summaries {
            let mine: Vec<_> = a.records.iter().filter(|r| r.engine == s.engine).collect();
            assert_eq!(
                s.total_examined_routes,
                mine.iter().map(|r| r.examined_routes).sum::<u64>()
            );
            assert_eq!(
                s.total_nn_queries,
                mine.iter().map(|r| r.nn_queries).sum::<u64>()
            );
        }
        // every engine answers every query identically
        for q in 0..20 {
            let costs: Vec<_> = a
                .records
                .iter()
                .filter(|r| r.query == q)
                .map(|r| &r.costs)
                .collect();
            assert!(costs.windows(2).all(|w| w[0] == w[1]));
        }
        let mut tsv = Vec::new();
        a.write_tsv(&mut tsv).unwrap();
        assert_eq!(String::from_utf8(tsv).unwrap().lines().count(), 1 + 120);
    }

    #[test]
    fn tiny_timeout_flags_inf() {
        let g = crate::fixtures::random_digraph(5, 3000, 9000, 1..=100, true);
        let cm = assign_uniform_categories(&g, 6, 300, 1).unwrap();
        let index = KosrIndex::build(g, VertexNames::identity(3000), cm);
        let params = BenchParams {
            sequence_len: 6,
            k: 200,
            engines: vec![Engine::KPNE_DIJ],
            num_queries: 2,
            timeout: Duration::from_nanos(1),
            ..Default::default()
        };
        let report = run_bench(&index, &params).unwrap();
        let s = report.summary(Engine::KPNE_DIJ).unwrap();
        assert!(s.inf);
        assert!(report.to_text().contains("mean_runtime_ms=INF"));
    }

    #[test]
    fn empty_engine_list_is_rejected() {
        let index = fig1_index();
        let params = BenchParams {
            engines: vec![],
            ..Default::default()
        };
        assert!(matches!(
            run_bench(&index, &params),
            Err(Error::InvalidParameter(_))
        ));
    }
}

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use kosr::bench::{run_bench, BenchParams};
use kosr::engine::{run_dijkstra, run_labels, Backend, Engine, Query, QueryOptions, QueryOutcome};
use kosr::graph::{assign_uniform_categories, assign_zipf_categories, load_categories, load_graph};
use kosr::store::INDEX_DIR_ENV;
use kosr::{CategoryId, Error, IndexStore, LabelIndex, Result, UpdateOp, VertexNames};

/// Top-k optimal sequenced route queries.
#[derive(Parser)]
#[command(name = "kosr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the label and category indexes for a graph.
    Build(BuildArgs),
    /// Answer one query.
    Query(QueryArgs),
    /// Add or remove a vertex's category membership.
    Update(UpdateArgs),
    /// Run a seeded batch of random queries and report averages.
    Bench(BenchArgs),
}

#[derive(clap::Args)]
struct BuildArgs {
    /// Edge list: `u v w` lines, or DIMACS `a u v w` lines.
    #[arg(long)]
    graph: PathBuf,
    /// Treat every edge as usable in both directions.
    #[arg(long)]
    undirected: bool,
    /// `vertex category` lines.
    #[arg(long, conflicts_with_all = ["uniform", "zipf"])]
    categories: Option<PathBuf>,
    /// Generate this many equal-size categories.
    #[arg(long, requires = "size", conflicts_with = "zipf")]
    uniform: Option<usize>,
    /// Members per generated uniform category.
    #[arg(long)]
    size: Option<usize>,
    /// Generate this many skewed categories covering every vertex.
    #[arg(long, requires = "factor")]
    zipf: Option<usize>,
    /// Skew factor f >= 1 for `--zipf`.
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, env = INDEX_DIR_ENV)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Mem,
    Disk,
}

#[derive(clap::Args)]
struct QueryArgs {
    #[arg(long, env = INDEX_DIR_ENV)]
    index: PathBuf,
    #[arg(long, short)]
    source: String,
    #[arg(long, short)]
    target: String,
    /// Comma-separated category names, in visiting order.
    #[arg(long, short, value_delimiter = ',', required = true)]
    categories: Vec<String>,
    #[arg(short, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// kpne, pk, sk, kpne-dij, pk-dij or sk-dij.
    #[arg(long, short, default_value = "sk")]
    engine: Engine,
    #[arg(long, value_enum, default_value = "mem")]
    mode: Mode,
    /// Also print the full vertex path of every route.
    #[arg(long)]
    expand: bool,
    /// Print search counters to stderr.
    #[arg(long)]
    stats: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Add,
    Remove,
}

#[derive(clap::Args)]
struct UpdateArgs {
    #[arg(long, env = INDEX_DIR_ENV)]
    index: PathBuf,
    #[arg(value_enum)]
    op: Op,
    vertex: String,
    category: String,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, env = INDEX_DIR_ENV)]
    index: PathBuf,
    /// Categories per query.
    #[arg(long, default_value_t = 3)]
    sequence_len: usize,
    #[arg(short, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Comma-separated engine names.
    #[arg(long, value_delimiter = ',', default_value = "pk,sk")]
    engines: Vec<Engine>,
    #[arg(long, default_value_t = 50)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-query timeout in seconds; slower engines are reported as INF.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Also write per-query rows to this tab-separated file.
    #[arg(long)]
    tsv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Build(args) => build(args),
        Command::Query(args) => query(args),
        Command::Update(args) => update(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 1 } else { 2 })
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn build(args: BuildArgs) -> Result<()> {
    let (graph, names) = load_graph(open(&args.graph)?, !args.undirected)?;
    let categories = if let Some(path) = &args.categories {
        load_categories(open(path)?, &names)?
    } else if let (Some(num), Some(size)) = (args.uniform, args.size) {
        assign_uniform_categories(&graph, num, size, args.seed)?
    } else if let (Some(num), Some(f)) = (args.zipf, args.factor) {
        assign_zipf_categories(&graph, num, f, args.seed)?
    } else {
        return Err(Error::InvalidParameter(
            "give --categories, --uniform/--size or --zipf/--factor".into(),
        ));
    };
    let (vertices, arcs) = (graph.vertex_count(), graph.arc_count());
    let (_, _, report) = IndexStore::build(&args.out, graph, names, categories)?;
    println!(
        "vertices={vertices} arcs={arcs} categories={} build_time_ms={:.1} label_time_ms={:.1} \
         avg_out_label={:.2} avg_in_label={:.2} label_entries={}",
        report.categories,
        report.total_time.as_secs_f64() * 1e3,
        report.label_time.as_secs_f64() * 1e3,
        report.avg_out_label,
        report.avg_in_label,
        report.label_entries
    );
    Ok(())
}

fn join_names(names: &VertexNames, vertices: &[u32]) -> String {
    vertices
        .iter()
        .map(|&v| names.name(v))
        .collect::<Vec<_>>()
        .join(",")
}

fn query(args: QueryArgs) -> Result<()> {
    let store = IndexStore::new(&args.index);
    let names = store.load_names()?;
    let s = names.resolve(&args.source)?;
    let t = names.resolve(&args.target)?;
    let k = args.k as usize;
    let options = QueryOptions::default();

    let mut segment_reads = None;
    let mut labels: Option<LabelIndex> = None;
    let outcome: QueryOutcome = match (args.mode, args.engine.backend) {
        (Mode::Mem, _) => {
            let index = store.load()?;
            let seq = resolve_categories(&args.categories, |n| index.categories.resolve(n))?;
            let out = index.query(args.engine, &Query::new(s, t, seq, k), &options)?;
            labels = Some(index.labels);
            out
        }
        (Mode::Disk, Backend::Labels) => {
            let manifest = store.read_manifest()?;
            let seq = resolve_categories(&args.categories, |n| manifest.resolve_category(n))?;
            let view = store.open_query_view(s, t, &seq)?;
            segment_reads = Some(view.segment_reads());
            run_labels(
                &view,
                &view,
                args.engine.algorithm,
                &Query::new(s, t, seq, k),
                &options,
            )?
        }
        (Mode::Disk, Backend::Dijkstra) => {
            let graph = store.load_graph()?;
            let (categories, _) = store.load_categories()?;
            let seq = resolve_categories(&args.categories, |n| categories.resolve(n))?;
            run_dijkstra(
                &graph,
                &categories,
                args.engine.algorithm,
                &Query::new(s, t, seq, k),
                &options,
            )?
        }
    };

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    if args.expand && labels.is_none() {
        labels = Some(store.load_labels()?);
    }
    for (rank, w) in outcome.witnesses.iter().enumerate() {
        writeln!(
            out,
            "{} {} {}",
            rank + 1,
            w.cost,
            join_names(&names, &w.vertices)
        )?;
        if let (true, Some(labels)) = (args.expand, &labels) {
            let path = labels.expand_witness(&w.vertices)?;
            writeln!(out, "  path {}", join_names(&names, &path))?;
        }
    }
    out.flush()?;

    if args.stats {
        let st = &outcome.stats;
        eprint!(
            "engine={} examined_routes={} extended_routes={} nn_queries={} runtime_ms={:.3}",
            args.engine,
            st.examined_routes,
            st.extended_routes,
            st.nn_queries,
            st.runtime.as_secs_f64() * 1e3
        );
        match segment_reads {
            Some(n) => eprintln!(" segment_reads={n}"),
            None => eprintln!(),
        }
    }
    Ok(())
}

fn resolve_categories(
    names: &[String],
    resolve: impl Fn(&str) -> Result<CategoryId>,
) -> Result<Vec<CategoryId>> {
    if names.is_empty() {
        return Err(Error::EmptySequence);
    }
    names.iter().map(|n| resolve(n)).collect()
}

fn update(args: UpdateArgs) -> Result<()> {
    let store = IndexStore::new(&args.index);
    let v = store.load_names()?.resolve(&args.vertex)?;
    let c = store.read_manifest()?.resolve_category(&args.category)?;
    let op = match args.op {
        Op::Add => UpdateOp::Add,
        Op::Remove => UpdateOp::Remove,
    };
    if !store.update(op, v, c)? {
        let state = if op == UpdateOp::Add {
            "already in"
        } else {
            "not in"
        };
        eprintln!(
            "warning: {} is {state} {}; nothing changed",
            args.vertex, args.category
        );
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    if !args.timeout.is_finite() || args.timeout <= 0.0 {
        return Err(Error::InvalidParameter("timeout must be positive".into()));
    }
    let index = IndexStore::new(&args.index).load()?;
    let params = BenchParams {
        sequence_len: args.sequence_len,
        k: args.k as usize,
        engines: args.engines,
        num_queries: args.queries,
        seed: args.seed,
        timeout: Duration::from_secs_f64(args.timeout),
    };
    let report = run_bench(&index, &params)?;
    print!("{}", report.to_text());
    if let Some(path) = &args.tsv {
        let mut w = BufWriter::new(File::create(path)?);
        report.write_tsv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

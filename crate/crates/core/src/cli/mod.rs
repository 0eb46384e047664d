//! The `factorml` command line.
//!
//! ```text
//! factorml aggregate CONFIG [-o results.csv] [--report] [--oracle] [--one-pass]
//!                           [--threads N] [--no-merge] [--exact]
//! factorml train     CONFIG [-o model.txt] [--lambda L] [--alpha A] [--max-iters N]
//!                           [--standardise] [--warm-start model.txt] [--updates FILE]
//! factorml stream    CONFIG UPDATES [--verify-every K] [--checkpoint-every K] [--exact]
//! factorml bench     CONFIG [--scale F] [--seed N] [--csv] [--threads N]
//! ```
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 data error
//! (unreadable or malformed CSV or update stream), 3 a result check failed
//! (`--oracle` mismatch or `--verify-every` failure), 4 training diverged.
//!
//! # Config file
//!
//! A TOML file. Paths are relative to the file. Top-level keys come before
//! the tables:
//!
//! ```toml
//! # optional; needed by `aggregate --one-pass`
//! variable_order = "dish(day(customer), item(price))"
//! # AggregateSpec syntax: SUM(1 | attr * attr ...) [GROUP BY a, b] [WHERE filter]
//! aggregates = ["SUM(1)", "SUM(price) GROUP BY dish", "SUM(1) WHERE price >= 4"]
//!
//! [[relation]]
//! name = "Orders"
//! path = "orders.csv"
//! attributes = ["customer:cat", "day:cat", "dish:cat"]   # kinds: num | cat
//! header = true        # default true
//! delimiter = ","      # default ","
//!
//! [[relation]]
//! name = "Dish"
//! path = "dish.csv"
//! attributes = ["dish:cat", "item:cat"]
//!
//! [[relation]]
//! name = "Items"
//! path = "items.csv"
//! attributes = ["item:cat", "price:num"]
//!
//! [join_tree]                              # optional; inferred when absent
//! edges = [["Orders", "Dish"], ["Dish", "Items"]]
//! root = "Orders"                          # default: the largest relation
//!
//! [model]                                  # for `train`, `bench`, `stream`
//! features = ["x"]
//! response = "y"
//! lambda = 0.0
//! # alpha = 1e-3; tol = 1e-10; max_iters = 100000; standardise = false
//! ```
//!
//! Instead of `[[relation]]` entries a `[generator]` table builds a star
//! schema (`facts`, `dimensions`, `fanout`, `keys`, `measures`, `seed`); its
//! join tree, variable order and model (all numeric attributes, response
//! `y`) are used unless given explicitly.
//!
//! Update streams have one update per line:
//! `relation,+|-,multiplicity,value1,value2,...`.

mod bench;
mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use bench::{run_bench, BenchReport, PipelineTiming};
pub use config::{Config, GeneratorConfig, JoinTreeConfig, ModelConfig, RelationConfig, Workload};

use crate::error::{Error, Result};
use crate::evaluator::{eval_batch, eval_view_dag, write_results, AggResult, EvalOptions};
use crate::ivm::{init_state, read_updates, Delta};
use crate::mlkit::{covariance_batch, train_linreg_from, CovarianceMatrix, LinearModel};
use crate::naive;
use crate::relcore::Database;
use crate::scalar::{Rational, Scalar};
use crate::vorder::{decompose_aggregates, AggregateSpec, DecomposeOptions};

#[derive(Debug, Parser)]
#[command(name = "factorml", version, about = "Aggregates and models over relational joins without materialising them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the aggregate batch of a config.
    Aggregate(AggregateArgs),
    /// Train a ridge regression model from the covariance aggregates.
    Train(TrainArgs),
    /// Maintain the aggregates under a stream of inserts and deletes.
    Stream(StreamArgs),
    /// Compare the factorised pipeline with materialise-then-aggregate.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    pub config: PathBuf,
    /// Results CSV; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print scans, view entries and per-group timings to standard error.
    #[arg(long)]
    pub report: bool,
    /// Also materialise the join, aggregate it directly, and compare.
    #[arg(long)]
    pub oracle: bool,
    /// Fold along the variable order instead of evaluating the view hierarchy.
    #[arg(long)]
    pub one_pass: bool,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Keep one view per aggregate instead of merging equal views.
    #[arg(long)]
    pub no_merge: bool,
    /// Exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub config: PathBuf,
    /// Model file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub standardise: bool,
    /// Start gradient descent from this model's weights.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    /// Apply this update stream to the data before training.
    #[arg(long)]
    pub updates: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Generator scale factor (configs with a [generator]).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    pub config: PathBuf,
    pub updates: PathBuf,
    /// Compare the maintained views with a full recomputation every K updates
    /// and at the end.
    #[arg(long)]
    pub verify_every: Option<usize>,
    /// Replace the maintained views by a full recomputation every K updates.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    #[arg(long)]
    pub exact: bool,
    /// Final results CSV; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub config: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Machine-readable output.
    #[arg(long)]
    pub csv: bool,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

/// Exit code for an error: 2 for problems with the data, 4 for divergence,
/// 1 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse { .. } | Error::UpdateStream { .. } | Error::SchemaMismatch(_) => 2,
        Error::Diverged { .. } => 4,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let config_path = match &cli.command {
        Command::Aggregate(a) => &a.config,
        Command::Train(a) => &a.config,
        Command::Stream(a) => &a.config,
        Command::Bench(a) => &a.config,
    };
    let config = match Config::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let outcome = match &cli.command {
        Command::Aggregate(a) if a.exact => aggregate::<Rational>(&config, a, out, err),
        Command::Aggregate(a) => aggregate::<f64>(&config, a, out, err),
        Command::Train(a) => train(&config, a, out, err),
        Command::Stream(a) if a.exact => stream::<Rational>(&config, a, out, err),
        Command::Stream(a) => stream::<f64>(&config, a, out, err),
        Command::Bench(a) => bench(&config, a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

/// Runs `f` on the output file, or on standard output.
fn with_output(path: Option<&Path>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(io_err(p))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(io_err(p))
        }
        None => f(out),
    }
}

fn aggregate<S: Scalar>(config: &Config, a: &AggregateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let w = config.workload(1.0, None)?;
    if w.batch.is_empty() {
        return Err(Error::Config("no aggregates in config".into()));
    }
    let results: Vec<AggResult<S>> = if a.one_pass {
        let order = w
            .order
            .as_ref()
            .ok_or_else(|| Error::Config("--one-pass needs a variable_order".into()))?;
        let t = Instant::now();
        let r = eval_batch::<S>(&w.db, order, &w.batch)?;
        if a.report {
            let _ = writeln!(err, "one-pass fold: {:.3} ms", t.elapsed().as_secs_f64() * 1e3);
        }
        r
    } else {
        let options = DecomposeOptions { merge: !a.no_merge };
        let dag = decompose_aggregates(&w.batch, &w.join_tree, w.root, &w.db.schemas(), options)?;
        let ev = eval_view_dag::<S>(&w.db, &dag, EvalOptions { threads: a.threads.max(1) })?;
        if a.report {
            let s = &ev.stats;
            let _ = writeln!(err, "views: {} in {} groups", dag.len(), dag.groups.len());
            let _ = writeln!(
                err,
                "scans: {} (one per aggregate would be {})",
                s.scans,
                w.batch.len() * dag.tree.len()
            );
            let _ = writeln!(err, "tuples scanned: {}, view entries: {}, terms: {}", s.tuples_scanned, s.view_entries, s.terms);
            for g in &s.groups {
                let _ = writeln!(
                    err,
                    "  {}: {} views over {} tuples in {:.3} ms",
                    g.relation,
                    g.views,
                    g.tuples,
                    g.elapsed.as_secs_f64() * 1e3
                );
            }
            let _ = writeln!(err, "total: {:.3} ms", s.elapsed.as_secs_f64() * 1e3);
        }
        ev.results
    };
    with_output(a.output.as_deref(), out, |w_out| {
        write_results(w_out, &w.batch, &results, w.db.catalog(), w.db.dict())
    })?;
    if a.oracle {
        let join = naive::materialise(&w.db)?;
        let expected = w
            .batch
            .iter()
            .map(|s| naive::aggregate::<S>(&join, &w.db, s))
            .collect::<Result<Vec<_>>>()?;
        let tol = if std::any::TypeId::of::<S>() == std::any::TypeId::of::<f64>() { 1e-9 } else { 0.0 };
        let bad: Vec<&AggregateSpec> = w
            .batch
            .iter()
            .zip(results.iter().zip(&expected))
            .filter(|(_, (r, e))| !r.close_to(e, tol))
            .map(|(s, _)| s)
            .collect();
        if bad.is_empty() {
            let _ = writeln!(err, "oracle: match ({} aggregates over {} join tuples)", w.batch.len(), join.len());
        } else {
            for s in bad {
                let _ = writeln!(err, "oracle: mismatch for {s}");
            }
            return Ok(3);
        }
    }
    Ok(0)
}

fn apply_to_db(db: &mut Database, deltas: &[Delta]) -> Result<()> {
    for d in deltas {
        let rel = db
            .relation(d.relation_name())
            .ok_or_else(|| Error::UnknownRelation(d.relation_name().to_string()))?
            .add(d.as_relation())?;
        db.set_relation(rel)?;
    }
    Ok(())
}

fn train(config: &Config, a: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut w = config.workload(a.scale, a.seed)?;
    let mut spec = w.model.clone().ok_or_else(|| Error::Config("no [model] in config".into()))?;
    if let Some(l) = a.lambda {
        spec.lambda = l;
    }
    if let Some(al) = a.alpha {
        spec.alpha = Some(al);
    }
    if let Some(n) = a.max_iters {
        spec.max_iters = n;
    }
    spec.standardise |= a.standardise;
    if let Some(p) = &a.updates {
        let file = File::open(p).map_err(io_err(p))?;
        let deltas = read_updates(file, &mut w.db)?;
        apply_to_db(&mut w.db, &deltas)?;
    }
    let start = match &a.warm_start {
        Some(p) => Some(LinearModel::read(File::open(p).map_err(io_err(p))?)?),
        None => None,
    };

    let mut attrs = spec.features.clone();
    attrs.push(spec.response.clone());
    let t = Instant::now();
    let batch = covariance_batch(&attrs);
    let dag = decompose_aggregates(&batch, &w.join_tree, w.root, &w.db.schemas(), DecomposeOptions::default())?;
    let ev = eval_view_dag::<f64>(&w.db, &dag, EvalOptions { threads: a.threads.max(1) })?;
    let m = CovarianceMatrix::from_batch_results(&attrs, &ev.results)?;
    let agg_time = t.elapsed();
    let t = Instant::now();
    let model = train_linreg_from(&m, &spec, start.as_ref())?;
    let gd_time = t.elapsed();

    let _ = writeln!(err, "aggregates: {:.3} ms ({} aggregates)", agg_time.as_secs_f64() * 1e3, batch.len());
    let _ = writeln!(
        err,
        "gradient descent: {:.3} ms ({} iterations, converged: {})",
        gd_time.as_secs_f64() * 1e3,
        model.iterations,
        model.converged
    );
    with_output(a.output.as_deref(), out, |w_out| model.write(w_out))?;
    Ok(0)
}

fn stream<S: Scalar>(config: &Config, a: &StreamArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let w = config.workload(a.scale, a.seed)?;
    let batch = if !w.batch.is_empty() {
        w.batch.clone()
    } else if let Some(m) = &w.model {
        let mut attrs = m.features.clone();
        attrs.push(m.response.clone());
        covariance_batch(&attrs)
    } else {
        return Err(Error::Config("no aggregates or [model] in config".into()));
    };
    let dag = decompose_aggregates(&batch, &w.join_tree, w.root, &w.db.schemas(), DecomposeOptions::default())?;
    let mut state = init_state::<S>(w.db, dag)?.with_checkpoint_every(a.checkpoint_every);
    let file = File::open(&a.updates).map_err(io_err(&a.updates))?;
    let deltas = state.read_updates(file)?;
    let tol = if std::any::TypeId::of::<S>() == std::any::TypeId::of::<f64>() { 1e-8 } else { 0.0 };

    let t = Instant::now();
    let mut max_nodes = 0;
    let mut total_nodes = 0;
    let mut total_views = 0;
    for (i, d) in deltas.iter().enumerate() {
        let r = state.apply_delta(d)?;
        max_nodes = max_nodes.max(r.nodes.len());
        total_nodes += r.nodes.len();
        total_views += r.views.len();
        if let Some(k) = a.verify_every.filter(|&k| k > 0) {
            if (i + 1) % k == 0 && !state.verify(tol)? {
                let _ = writeln!(err, "verification failed after update {}", i + 1);
                return Ok(3);
            }
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    let n = deltas.len();
    let _ = writeln!(err, "updates: {n}");
    let _ = writeln!(err, "elapsed: {:.3} s", elapsed);
    if n > 0 {
        let rate = if elapsed > 0.0 { n as f64 / elapsed } else { f64::INFINITY };
        let _ = writeln!(err, "throughput: {rate:.0} updates/s");
        let _ = writeln!(
            err,
            "join-tree nodes touched per update: max {max_nodes}, mean {:.2} (tree depth {})",
            total_nodes as f64 / n as f64,
            state.dag().tree.depth()
        );
        let _ = writeln!(err, "views touched per update: mean {:.2}", total_views as f64 / n as f64);
    }
    if a.verify_every.is_some() {
        if !state.verify(tol)? {
            let _ = writeln!(err, "verification failed at the end of the stream");
            return Ok(3);
        }
        let _ = writeln!(err, "verification: ok");
    }
    let db = state.database();
    with_output(a.output.as_deref(), out, |w_out| {
        write_results(w_out, &batch, state.results(), db.catalog(), db.dict())
    })?;
    Ok(0)
}

fn bench(config: &Config, a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let w = config.workload(a.scale, a.seed)?;
    let report = run_bench(&w, a.threads.max(1))?;
    out.write_all(report.table(a.csv).as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
    Ok(0)
}

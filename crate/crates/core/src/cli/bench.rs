use std::fmt::Write as _;
use std::time::{Duration, Instant};

use super::config::Workload;
use crate::error::{Error, Result};
use crate::evaluator::{eval_view_dag, EvalOptions};
use crate::mlkit::{covariance_batch, train_linreg, CovarianceMatrix, LinearModel};
use crate::naive;
use crate::vorder::{decompose_aggregates, DecomposeOptions};

/// Wall-clock split of one pipeline.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PipelineTiming {
    pub join: Duration,
    pub export: Duration,
    pub aggregates: Duration,
    pub training: Duration,
    /// Largest number of intermediate tuples held at once: view entries
    /// for the factorised pipeline, join tuples for the materialised one.
    pub intermediate_tuples: usize,
}

impl PipelineTiming {
    pub fn total(&self) -> Duration {
        self.join + self.export + self.aggregates + self.training
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub join_tuples: usize,
    pub aggregates: usize,
    pub factorised: PipelineTiming,
    pub materialised: PipelineTiming,
    pub factorised_model: LinearModel,
    pub materialised_model: LinearModel,
    /// Both pipelines produced the same covariance matrix (1e-9 relative).
    pub agree: bool,
}

impl BenchReport {
    /// Materialised total over factorised total.
    pub fn speedup(&self) -> f64 {
        let f = self.factorised.total().as_secs_f64();
        if f == 0.0 {
            return 1.0;
        }
        self.materialised.total().as_secs_f64() / f
    }

    pub fn table(&self, csv: bool) -> String {
        let rows = [("factorised", &self.factorised), ("materialised", &self.materialised)];
        let mut s = String::new();
        if csv {
            s.push_str("pipeline,join_s,export_s,aggregates_s,training_s,total_s,intermediate_tuples,join_tuples,aggregates,speedup\n");
            for (name, t) in rows {
                let _ = writeln!(
                    s,
                    "{name},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{:.3}",
                    t.join.as_secs_f64(),
                    t.export.as_secs_f64(),
                    t.aggregates.as_secs_f64(),
                    t.training.as_secs_f64(),
                    t.total().as_secs_f64(),
                    t.intermediate_tuples,
                    self.join_tuples,
                    self.aggregates,
                    self.speedup()
                );
            }
        } else {
            let _ = writeln!(s, "join tuples: {}, aggregates: {}", self.join_tuples, self.aggregates);
            let _ = writeln!(
                s,
                "{:<14}{:>10}{:>10}{:>12}{:>10}{:>10}{:>16}",
                "pipeline", "join", "export", "aggregates", "training", "total", "intermediates"
            );
            for (name, t) in rows {
                let _ = writeln!(
                    s,
                    "{name:<14}{:>10.3}{:>10.3}{:>12.3}{:>10.3}{:>10.3}{:>16}",
                    t.join.as_secs_f64(),
                    t.export.as_secs_f64(),
                    t.aggregates.as_secs_f64(),
                    t.training.as_secs_f64(),
                    t.total().as_secs_f64(),
                    t.intermediate_tuples
                );
            }
            let _ = writeln!(s, "speedup: {:.2}x (times in seconds)", self.speedup());
        }
        s
    }
}

/// Runs the covariance batch of the workload's model attributes and trains
/// the model twice: from the view hierarchy over the base relations, and
/// from a materialised, exported and re-imported join.
pub fn run_bench(w: &Workload, threads: usize) -> Result<BenchReport> {
    let spec = w
        .model
        .as_ref()
        .ok_or_else(|| Error::Config("bench needs a [model] or a [generator]".into()))?;
    let mut attrs = spec.features.clone();
    attrs.push(spec.response.clone());
    let batch = covariance_batch(&attrs);

    let mut fact = PipelineTiming::default();
    let t = Instant::now();
    let dag = decompose_aggregates(&batch, &w.join_tree, w.root, &w.db.schemas(), DecomposeOptions::default())?;
    let ev = eval_view_dag::<f64>(&w.db, &dag, EvalOptions { threads })?;
    let m_fact = CovarianceMatrix::from_batch_results(&attrs, &ev.results)?;
    fact.aggregates = t.elapsed();
    fact.intermediate_tuples = ev.stats.view_entries;
    let t = Instant::now();
    let factorised_model = train_linreg(&m_fact, spec)?;
    fact.training = t.elapsed();

    let mut mat = PipelineTiming::default();
    let t = Instant::now();
    let join = naive::materialise(&w.db)?;
    mat.join = t.elapsed();
    mat.intermediate_tuples = join.len();
    let t = Instant::now();
    let join = naive::export_round_trip(&join, w.db.dict())?;
    mat.export = t.elapsed();
    let t = Instant::now();
    let results = batch
        .iter()
        .map(|s| naive::aggregate::<f64>(&join, &w.db, s))
        .collect::<Result<Vec<_>>>()?;
    let m_mat = CovarianceMatrix::from_batch_results(&attrs, &results)?;
    mat.aggregates = t.elapsed();
    let t = Instant::now();
    let materialised_model = train_linreg(&m_mat, spec)?;
    mat.training = t.elapsed();

    let agree = m_fact
        .rows()
        .iter()
        .flatten()
        .zip(m_mat.rows().iter().flatten())
        .all(|(a, b)| crate::scalar::Scalar::close_to(a, b, 1e-9));
    Ok(BenchReport {
        join_tuples: join.total_multiplicity().max(0) as usize,
        aggregates: batch.len(),
        factorised: fact,
        materialised: mat,
        factorised_model,
        materialised_model,
        agree,
    })
}

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use smallvec::SmallVec;

use super::fused::AttrUse;
use super::results::AggResult;
use crate::error::{Error, Result};
use crate::relcore::{AttrId, Database, Value};
use crate::rings::{GroupByMap, GroupKey};
use crate::scalar::Scalar;
use crate::vorder::{decompose_aggregates, AggregateSpec, DecomposeOptions, JoinTree, ViewDag, ViewGroup, ViewId};

/// Values of a node's connecting attributes (those shared with its parent).
pub type ViewKey = SmallVec<[Value; 2]>;

/// A materialised view: connecting-attribute values to partial aggregates.
pub type ViewTable<S> = HashMap<ViewKey, GroupByMap<S>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Worker threads for independent view groups; 1 runs everything on the
    /// calling thread, in a fixed order.
    pub threads: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { threads: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupTiming {
    pub relation: String,
    pub views: usize,
    pub tuples: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalStats {
    /// Relation scans performed: one per view group.
    pub scans: usize,
    pub tuples_scanned: usize,
    /// Entries over all materialised views.
    pub view_entries: usize,
    /// Tuple-view contributions computed.
    pub terms: u64,
    pub groups: Vec<GroupTiming>,
    pub elapsed: Duration,
}

impl EvalStats {
    fn absorb(&mut self, other: EvalStats) {
        self.scans += other.scans;
        self.tuples_scanned += other.tuples_scanned;
        self.view_entries += other.view_entries;
        self.terms += other.terms;
        self.groups.extend(other.groups);
        self.elapsed += other.elapsed;
    }
}

#[derive(Clone, Debug)]
pub struct ViewEvaluation<S> {
    pub tables: Vec<ViewTable<S>>,
    pub results: Vec<AggResult<S>>,
    pub stats: EvalStats,
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledView {
    /// Attributes owned by the view's node: schema position, id, use.
    pub own: Vec<(usize, AttrId, AttrUse)>,
    pub children: Vec<ViewId>,
}

/// A view DAG resolved against a database: schema positions of connecting
/// attributes and per-view lifts.
#[derive(Clone, Debug)]
pub(crate) struct CompiledDag {
    pub relation_of: Vec<usize>,
    pub conn_pos: Vec<Vec<usize>>,
    pub child_pos: Vec<Vec<Vec<usize>>>,
    pub views: Vec<CompiledView>,
}

pub(crate) fn add_table<S: Scalar>(table: &mut ViewTable<S>, key: ViewKey, delta: &GroupByMap<S>) {
    match table.entry(key) {
        std::collections::hash_map::Entry::Occupied(mut e) => {
            let sum = e.get().add(delta);
            if sum.is_empty() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
        std::collections::hash_map::Entry::Vacant(e) => {
            if !delta.is_empty() {
                e.insert(delta.clone());
            }
        }
    }
}

impl CompiledDag {
    pub(crate) fn new(db: &Database, dag: &ViewDag) -> Result<Self> {
        let tree = &dag.tree;
        let relation_of = tree
            .relations
            .iter()
            .map(|r| db.relation_index(r))
            .collect::<Result<Vec<_>>>()?;
        let schema = |n: usize| db.relations()[relation_of[n]].schema();
        let positions = |n: usize, attrs: &[String]| -> Vec<usize> {
            attrs
                .iter()
                .map(|a| schema(n).index_of(a).expect("join tree built from these schemas"))
                .collect()
        };
        let conn_pos = (0..tree.len()).map(|n| positions(n, &tree.conn[n])).collect();
        let child_pos = (0..tree.len())
            .map(|n| tree.children[n].iter().map(|&c| positions(n, &tree.conn[c])).collect())
            .collect();
        let views = dag
            .views
            .iter()
            .map(|v| {
                let bound = v.spec.as_spec().bind(db.catalog(), db.dict())?;
                let own = schema(v.node)
                    .attribute_names()
                    .enumerate()
                    .filter(|(_, a)| tree.owner(a) == Some(v.node))
                    .filter_map(|(pos, a)| {
                        let id = db.catalog().id(a).expect("catalog covers every schema");
                        bound.mentions(id).then(|| {
                            let u = AttrUse {
                                power: bound.power(id),
                                group: bound.groups_by(id),
                                filter: bound.filter_on(id).cloned(),
                            };
                            (pos, id, u)
                        })
                    })
                    .collect();
                Ok(CompiledView {
                    own,
                    children: v.children.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledDag {
            relation_of,
            conn_pos,
            child_pos,
            views,
        })
    }

    pub(crate) fn key(tuple: &[Value], positions: &[usize]) -> ViewKey {
        positions.iter().map(|&p| tuple[p]).collect()
    }

    /// Keys of `tuple` (a tuple of `node`'s relation) into each child's views.
    pub(crate) fn child_keys(&self, node: usize, tuple: &[Value]) -> SmallVec<[ViewKey; 4]> {
        self.child_pos[node].iter().map(|p| Self::key(tuple, p)).collect()
    }

    /// Contribution of one tuple (with multiplicity `m`) of the view's node
    /// relation. `lookup(i, view, key)` reads the `i`-th child view, keyed by
    /// `child_keys[i]`.
    pub(crate) fn term<'t, S: Scalar>(
        &self,
        view: ViewId,
        tuple: &[Value],
        m: i64,
        child_keys: &[ViewKey],
        lookup: impl Fn(usize, ViewId, &ViewKey) -> Option<&'t GroupByMap<S>>,
    ) -> Option<GroupByMap<S>> {
        let cv = &self.views[view];
        let mut scalar = S::from_int(m);
        let mut key = GroupKey::new();
        for (pos, id, u) in &cv.own {
            let v = &tuple[*pos];
            if let Some(f) = &u.filter {
                if !f.admits(v) {
                    return None;
                }
            }
            if u.power > 0 {
                let base = S::from_value(v.as_f64().expect("products are over numeric attributes"));
                for _ in 0..u.power {
                    scalar = scalar * base.clone();
                }
            }
            if u.group {
                key.push((*id, *v));
            }
        }
        let mut keyed: Option<GroupByMap<S>> = None;
        for (i, &child) in cv.children.iter().enumerate() {
            let map = lookup(i, child, &child_keys[i])?;
            match map.iter().next() {
                Some((k, v)) if map.len() == 1 && k.is_empty() => scalar = scalar * v.clone(),
                _ => {
                    keyed = Some(match keyed {
                        None => map.clone(),
                        Some(acc) => acc.mul(map),
                    })
                }
            }
        }
        let own = GroupByMap::singleton(key, scalar);
        let out = match keyed {
            None => own,
            Some(k) => own.mul(&k),
        };
        (!out.is_empty()).then_some(out)
    }

    /// Computes all views of one group with a single scan of the node's
    /// relation.
    fn scan_group<S: Scalar>(&self, db: &Database, group: &ViewGroup, tables: &[ViewTable<S>]) -> (Vec<ViewTable<S>>, u64, usize) {
        let rel = &db.relations()[self.relation_of[group.node]];
        let mut out: Vec<ViewTable<S>> = vec![HashMap::new(); group.views.len()];
        let mut terms = 0;
        for (tuple, &m) in rel.iter() {
            let key = Self::key(tuple, &self.conn_pos[group.node]);
            let child_keys = self.child_keys(group.node, tuple);
            for (slot, &v) in group.views.iter().enumerate() {
                terms += 1;
                if let Some(t) = self.term(v, tuple, m, &child_keys, |_, child, k| tables[child].get(k)) {
                    add_table(&mut out[slot], key.clone(), &t);
                }
            }
        }
        (out, terms, rel.len())
    }
}

pub(crate) fn root_results<S: Scalar>(dag: &ViewDag, tables: &[ViewTable<S>]) -> Vec<AggResult<S>> {
    dag.batch
        .iter()
        .zip(&dag.outputs)
        .map(|(spec, &v)| {
            let map = tables[v].get(&ViewKey::new()).cloned().unwrap_or_default();
            AggResult::from_map(spec, map)
        })
        .collect()
}

/// Evaluates a view DAG bottom-up. Each view group is one scan of its
/// node's relation; groups on the same level run concurrently when
/// `options.threads > 1`.
pub fn eval_view_dag<S: Scalar>(db: &Database, dag: &ViewDag, options: EvalOptions) -> Result<ViewEvaluation<S>> {
    let start = Instant::now();
    let compiled = CompiledDag::new(db, dag)?;
    let mut tables: Vec<ViewTable<S>> = vec![HashMap::new(); dag.views.len()];
    let mut stats = EvalStats::default();
    let pool = if options.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(options.threads)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    for level in dag.levels() {
        let run = |g: &&ViewGroup| {
            let t0 = Instant::now();
            let (out, terms, tuples) = compiled.scan_group(db, g, &tables);
            (out, terms, tuples, t0.elapsed())
        };
        let done: Vec<_> = match &pool {
            Some(p) => p.install(|| level.par_iter().map(run).collect()),
            None => level.iter().map(run).collect(),
        };
        for (g, (out, terms, tuples, elapsed)) in level.iter().zip(done) {
            stats.scans += 1;
            stats.tuples_scanned += tuples;
            stats.terms += terms;
            stats.groups.push(GroupTiming {
                relation: dag.tree.relations[g.node].clone(),
                views: g.views.len(),
                tuples,
                elapsed,
            });
            for (&v, table) in g.views.iter().zip(out) {
                tables[v] = table;
            }
        }
    }
    stats.view_entries = tables.iter().map(HashMap::len).sum();
    let results = root_results(dag, &tables);
    stats.elapsed = start.elapsed();
    Ok(ViewEvaluation {
        tables,
        results,
        stats,
    })
}

/// The unshared baseline: decomposes and evaluates every aggregate on its
/// own, so each one scans every relation.
pub fn eval_per_aggregate<S: Scalar>(
    db: &Database,
    jt: &JoinTree,
    root: usize,
    batch: &[AggregateSpec],
) -> Result<(Vec<AggResult<S>>, EvalStats)> {
    let schemas = db.schemas();
    let mut results = Vec::with_capacity(batch.len());
    let mut stats = EvalStats::default();
    for spec in batch {
        let dag = decompose_aggregates(std::slice::from_ref(spec), jt, root, &schemas, DecomposeOptions { merge: false })?;
        let ev = eval_view_dag::<S>(db, &dag, EvalOptions::default())?;
        results.extend(ev.results);
        stats.absorb(ev.stats);
    }
    Ok((results, stats))
}

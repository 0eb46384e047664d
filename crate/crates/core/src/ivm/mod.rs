//! Incremental maintenance of the view hierarchy.
//!
//! Inserts and deletes are both deltas with signed multiplicities. A delta
//! to the relation at a join-tree node changes that node's views by the
//! contribution of the delta tuples, and each parent's views by the
//! contribution of its own tuples that join with the changed keys. Nothing
//! off the path from the node to the root is touched.

mod delta;
mod stream;

use std::collections::{BTreeSet, HashMap};

pub use delta::Delta;
pub use stream::{parse_update, read_updates};

use crate::error::{Error, Result};
use crate::evaluator::{add_table, eval_view_dag, AggResult, CompiledDag, EvalOptions, ViewKey, ViewTable};
use crate::relcore::{Database, Dictionary, Tuple};
use crate::scalar::Scalar;
use crate::vorder::{ViewDag, ViewId};

/// What a delta touched.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaReport {
    /// Join-tree nodes whose views changed, from the updated node upwards.
    pub nodes: Vec<usize>,
    /// Views that changed.
    pub views: Vec<ViewId>,
}

/// Base relations, their materialised views, and the current results.
#[derive(Clone, Debug)]
pub struct MaintenanceState<S> {
    db: Database,
    dag: ViewDag,
    compiled: CompiledDag,
    tables: Vec<ViewTable<S>>,
    results: Vec<AggResult<S>>,
    /// `index[n][i]`: tuples of node `n`'s relation by the connecting key of
    /// its `i`-th child.
    index: Vec<Vec<HashMap<ViewKey, BTreeSet<Tuple>>>>,
    updates: usize,
    checkpoint_every: Option<usize>,
}

/// Evaluates `dag` over `db` and keeps everything needed to maintain it.
pub fn init_state<S: Scalar>(db: Database, dag: ViewDag) -> Result<MaintenanceState<S>> {
    let compiled = CompiledDag::new(&db, &dag)?;
    let ev = eval_view_dag::<S>(&db, &dag, EvalOptions::default())?;
    let mut index: Vec<Vec<HashMap<ViewKey, BTreeSet<Tuple>>>> = dag
        .tree
        .children
        .iter()
        .map(|ch| vec![HashMap::new(); ch.len()])
        .collect();
    for (n, per_child) in index.iter_mut().enumerate() {
        let rel = &db.relations()[compiled.relation_of[n]];
        for (i, idx) in per_child.iter_mut().enumerate() {
            for (t, _) in rel.iter() {
                idx.entry(CompiledDag::key(t, &compiled.child_pos[n][i]))
                    .or_default()
                    .insert(t.clone());
            }
        }
    }
    Ok(MaintenanceState {
        db,
        dag,
        compiled,
        tables: ev.tables,
        results: ev.results,
        index,
        updates: 0,
        checkpoint_every: None,
    })
}

impl<S: Scalar> MaintenanceState<S> {
    /// Recompute all views from scratch every `k` updates, discarding
    /// accumulated floating-point drift.
    pub fn with_checkpoint_every(mut self, k: Option<usize>) -> Self {
        self.checkpoint_every = k.filter(|&k| k > 0);
        self
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    /// The dictionary, for parsing updates that introduce new categories.
    pub fn dict_mut(&mut self) -> &mut Dictionary {
        self.db.dict_mut()
    }

    pub fn dag(&self) -> &ViewDag {
        &self.dag
    }

    pub fn tables(&self) -> &[ViewTable<S>] {
        &self.tables
    }

    pub fn results(&self) -> &[AggResult<S>] {
        &self.results
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Parses an update stream against the maintained database.
    pub fn read_updates(&mut self, reader: impl std::io::Read) -> Result<Vec<Delta>> {
        read_updates(reader, &mut self.db)
    }

    /// Applies `delta` to its relation and propagates the change up the
    /// join tree.
    pub fn apply_delta(&mut self, delta: &Delta) -> Result<DeltaReport> {
        let tree = &self.dag.tree;
        let node = tree
            .relations
            .iter()
            .position(|r| r == delta.relation_name())
            .ok_or_else(|| Error::UnknownRelation(delta.relation_name().to_string()))?;
        let rel_idx = self.compiled.relation_of[node];
        if self.db.relations()[rel_idx].schema() != delta.schema() {
            return Err(Error::SchemaMismatch(format!(
                "delta schema does not match relation `{}`",
                delta.relation_name()
            )));
        }
        for (t, _) in delta.iter() {
            self.db.relations()[rel_idx].check_tuple(t)?;
        }

        let mut report = DeltaReport::default();
        let tables = &self.tables;
        let c = &self.compiled;
        // views at the updated node: contributions of the delta tuples
        let mut changed: HashMap<ViewId, ViewTable<S>> = HashMap::new();
        for v in self.dag.views_at(node) {
            let mut dt: ViewTable<S> = HashMap::new();
            for (t, m) in delta.iter() {
                let keys = c.child_keys(node, t);
                if let Some(term) = c.term(v, t, m, &keys, |_, child, k| tables[child].get(k)) {
                    add_table(&mut dt, CompiledDag::key(t, &c.conn_pos[node]), &term);
                }
            }
            if !dt.is_empty() {
                changed.insert(v, dt);
            }
        }
        let mut level: Vec<ViewId> = changed.keys().copied().collect();
        let mut current = node;
        if !level.is_empty() {
            report.nodes.push(node);
        }
        // each parent: its tuples joining the changed keys, times the deltas
        while let (Some(parent), false) = (tree.parent[current], level.is_empty()) {
            let slot = tree.children[parent]
                .iter()
                .position(|&ch| ch == current)
                .expect("child of its parent");
            let prel = &self.db.relations()[c.relation_of[parent]];
            let mut next = Vec::new();
            for w in self.dag.views_at(parent) {
                let child_view = c.views[w].children[slot];
                let Some(dchild) = changed.get(&child_view) else {
                    continue;
                };
                let mut dt: ViewTable<S> = HashMap::new();
                for (key, dmap) in dchild {
                    let Some(tuples) = self.index[parent][slot].get(key) else {
                        continue;
                    };
                    for t in tuples {
                        let m = prel.multiplicity(t);
                        let keys = c.child_keys(parent, t);
                        let term = c.term(w, t, m, &keys, |i, child, k| {
                            if i == slot {
                                Some(dmap)
                            } else {
                                tables[child].get(k)
                            }
                        });
                        if let Some(term) = term {
                            add_table(&mut dt, CompiledDag::key(t, &c.conn_pos[parent]), &term);
                        }
                    }
                }
                if !dt.is_empty() {
                    next.push(w);
                    changed.insert(w, dt);
                }
            }
            if !next.is_empty() {
                report.nodes.push(parent);
            }
            level = next;
            current = parent;
        }

        for (&v, dt) in &changed {
            for (k, d) in dt {
                add_table(&mut self.tables[v], k.clone(), d);
            }
        }
        report.views = changed.into_keys().collect();
        report.views.sort_unstable();

        let rel = self.db.relation_mut(rel_idx);
        for (t, m) in delta.iter() {
            rel.insert_unchecked(t.clone(), m);
        }
        let rel = &self.db.relations()[rel_idx];
        for (i, idx) in self.index[node].iter_mut().enumerate() {
            for (t, _) in delta.iter() {
                let key = CompiledDag::key(t, &self.compiled.child_pos[node][i]);
                if rel.multiplicity(t) == 0 {
                    if let Some(set) = idx.get_mut(&key) {
                        set.remove(t);
                        if set.is_empty() {
                            idx.remove(&key);
                        }
                    }
                } else {
                    idx.entry(key).or_default().insert(t.clone());
                }
            }
        }

        self.updates += 1;
        if self.checkpoint_every.is_some_and(|k| self.updates.is_multiple_of(k)) {
            self.tables = self.recompute()?;
        }
        self.results = crate::evaluator::root_results(&self.dag, &self.tables);
        Ok(report)
    }

    /// All views evaluated from scratch over the current relations.
    pub fn recompute(&self) -> Result<Vec<ViewTable<S>>> {
        Ok(eval_view_dag::<S>(&self.db, &self.dag, EvalOptions::default())?.tables)
    }

    /// Checks every maintained view against a fresh evaluation; `rel_tol` 0
    /// demands exact equality.
    pub fn verify(&self, rel_tol: f64) -> Result<bool> {
        let fresh = self.recompute()?;
        Ok(self.tables.iter().zip(&fresh).all(|(a, b)| tables_close(a, b, rel_tol)))
    }
}

/// Key-by-key closeness; a key missing on one side counts as zero there.
pub fn tables_close<S: Scalar>(a: &ViewTable<S>, b: &ViewTable<S>, rel_tol: f64) -> bool {
    let empty = crate::rings::GroupByMap::zero();
    a.keys()
        .chain(b.keys())
        .all(|k| a.get(k).unwrap_or(&empty).close_to(b.get(k).unwrap_or(&empty), rel_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::Value;
    use crate::scalar::Rational;
    use crate::synth::{restaurant, restaurant_join_tree};
    use crate::vorder::{decompose_aggregates, AggregateSpec, DecomposeOptions};

    fn state() -> MaintenanceState<Rational> {
        let db = restaurant();
        let batch: Vec<AggregateSpec> = ["SUM(1)", "SUM(price) GROUP BY dish", "SUM(price * price)"]
            .iter()
            .map(|s| AggregateSpec::parse(s).unwrap())
            .collect();
        let jt = restaurant_join_tree();
        let root = jt.index_of("Orders").unwrap();
        let dag = decompose_aggregates(&batch, &jt, root, &db.schemas(), DecomposeOptions::default()).unwrap();
        init_state(db, dag).unwrap()
    }

    #[test]
    fn insert_then_delete_restores_state() {
        let mut s = state();
        assert_eq!(s.results()[0], AggResult::Scalar(Rational::from_int(12)));
        let before = s.tables().to_vec();
        let d = s.read_updates("Items,+,1,bun,3\n".as_bytes()).unwrap().remove(0);
        let report = s.apply_delta(&d).unwrap();
        assert_eq!(s.results()[0], AggResult::Scalar(Rational::from_int(16)));
        assert!(report.nodes.len() <= s.dag().tree.depth());
        assert!(s.verify(0.0).unwrap());
        s.apply_delta(&d.negate()).unwrap();
        assert_eq!(s.tables(), &before[..]);
    }

    #[test]
    fn leaf_update_leaves_other_branches_alone() {
        let mut s = state();
        let orders = s.dag().tree.relations.iter().position(|r| r == "Orders").unwrap();
        let items = s.dag().tree.relations.iter().position(|r| r == "Items").unwrap();
        let d = s.read_updates("Items,-,1,patty,6".as_bytes()).unwrap().remove(0);
        let report = s.apply_delta(&d).unwrap();
        assert_eq!(report.nodes[0], items);
        assert_eq!(*report.nodes.last().unwrap(), orders);
        for v in report.views {
            assert!(s.dag().tree.path_to_root(items).contains(&s.dag().views[v].node));
        }
        assert!(s.verify(0.0).unwrap());
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let mut s = state();
        let err = s.read_updates("# header\nItems,+,1,bun,3\nItems,*,1,bun,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::UpdateStream { line: 3, .. }));
        let err = s.read_updates("Items,+,1,bun\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::UpdateStream { line: 1, .. }));
        let err = s.read_updates("Items,+,1,bun,cheap\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::UpdateStream { line: 1, .. }));
        assert!(s.read_updates("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn unknown_category_inserts_work() {
        let mut s = state();
        let d = s.read_updates("Dish,+,2,burger,pickle\nItems,+,1,pickle,1\n".as_bytes()).unwrap();
        for x in &d {
            s.apply_delta(x).unwrap();
        }
        assert_eq!(s.results()[0], AggResult::Scalar(Rational::from_int(16)));
        assert!(s.verify(0.0).unwrap());
        let pickle = s.database().dict().lookup("item", "pickle").unwrap();
        assert!(matches!(pickle, Value::Cat(_)));
    }
}

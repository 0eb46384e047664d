use super::results::AggResult;
use crate::error::Result;
use crate::frep::{traverse, Plan, Sink};
use crate::relcore::{Database, Relation, Value};
use crate::rings::{CountingRing, GroupByMap, GroupByRing, GroupKey, LiftMap, Lifted, OpCounts, ProductRing, Ring};
use crate::scalar::Scalar;
use crate::vorder::{AggregateSpec, BoundFilter, VariableOrder};

/// Folds the join into a ring as it is traversed: every value becomes its
/// lift times its subtrees times its multiplicity, every union a sum.
struct RingSink<'r, R: Ring, L> {
    ring: &'r R,
    lift: L,
    pending: Vec<Option<R::Elem>>,
}

impl<R, L> Sink for RingSink<'_, R, L>
where
    R: Ring,
    L: Fn(usize, &Value) -> Lifted<R::Elem>,
{
    type Out = R::Elem;
    type Acc = R::Elem;

    fn admit(&mut self, node: usize, v: &Value) -> bool {
        match (self.lift)(node, v) {
            Lifted::Skip => false,
            Lifted::One => {
                self.pending[node] = None;
                true
            }
            Lifted::Elem(e) => {
                self.pending[node] = Some(e);
                true
            }
        }
    }

    fn start(&mut self, _node: usize) -> R::Elem {
        self.ring.zero()
    }

    fn push(&mut self, acc: &mut R::Elem, node: usize, _v: Value, weight: i64, children: &[R::Elem]) {
        let mut term = self.pending[node].take();
        for c in children {
            term = Some(match term {
                None => c.clone(),
                Some(t) => self.ring.times(&t, c),
            });
        }
        let term = term.unwrap_or_else(|| self.ring.one());
        if weight == 1 {
            self.ring.plus_assign(acc, &term);
        } else {
            self.ring.plus_assign(acc, &self.ring.scale(&term, weight));
        }
    }

    fn finish(&mut self, _node: usize, acc: R::Elem) -> R::Elem {
        acc
    }

    fn is_empty(&self, out: &R::Elem) -> bool {
        self.ring.is_zero(out)
    }
}

fn run<R: Ring>(plan: &Plan, ring: &R, lift: impl Fn(usize, &Value) -> Lifted<R::Elem>) -> R::Elem {
    let mut sink = RingSink {
        ring,
        lift,
        pending: vec![None; plan.nodes.len()],
    };
    traverse(plan, &mut sink, true)
}

fn plan(db: &Database, vo: &VariableOrder) -> Result<Plan> {
    let relations: Vec<&Relation> = db.relations().iter().collect();
    Plan::new(&relations, db.catalog(), vo)
}

/// Computes the ring expression of the join of `db` under `lifts` in one
/// traversal along `vo`, without building the factorised result.
pub fn fold_join<R: Ring>(db: &Database, vo: &VariableOrder, ring: &R, lifts: &LiftMap<'_, R::Elem>) -> Result<R::Elem> {
    let plan = plan(db, vo)?;
    let per_node: Vec<_> = (0..plan.order.len()).map(|n| lifts.get(plan.order.attr(n))).collect();
    Ok(run(&plan, ring, |node, v| per_node[node].map_or(Lifted::One, |f| f(v))))
}

/// [`fold_join`] that also reports the number of ring operations.
pub fn fold_join_counted<R: Ring + Clone>(
    db: &Database,
    vo: &VariableOrder,
    ring: &R,
    lifts: &LiftMap<'_, R::Elem>,
) -> Result<(R::Elem, OpCounts)> {
    let counting = CountingRing::new(ring.clone());
    let plan = plan(db, vo)?;
    let per_node: Vec<_> = (0..plan.order.len()).map(|n| lifts.get(plan.order.attr(n))).collect();
    let out = run(&plan, &counting, |node, v| per_node[node].map_or(Lifted::One, |f| f(v)));
    Ok((out, counting.counts()))
}

/// What one aggregate needs from one attribute.
#[derive(Clone, Debug)]
pub(crate) struct AttrUse {
    pub power: usize,
    pub group: bool,
    pub filter: Option<BoundFilter>,
}

impl AttrUse {
    /// Lift of `v`: its power (as a number) under the group key it
    /// contributes; zero if the filter rejects it.
    pub(crate) fn lift<S: Scalar>(&self, attr: usize, v: &Value) -> GroupByMap<S> {
        if let Some(f) = &self.filter {
            if !f.admits(v) {
                return GroupByMap::zero();
            }
        }
        let mut x = S::one();
        if self.power > 0 {
            let base = S::from_value(v.as_f64().expect("products are over numeric attributes"));
            for _ in 0..self.power {
                x = x * base.clone();
            }
        }
        let key: GroupKey = if self.group {
            smallvec::smallvec![(attr, *v)]
        } else {
            GroupKey::new()
        };
        GroupByMap::singleton(key, x)
    }
}

/// Evaluates every aggregate of `batch` over the join of `db` in a single
/// fold along `vo`.
pub fn eval_batch<S: Scalar>(db: &Database, vo: &VariableOrder, batch: &[AggregateSpec]) -> Result<Vec<AggResult<S>>> {
    let bound = batch
        .iter()
        .map(|s| s.bind(db.catalog(), db.dict()))
        .collect::<Result<Vec<_>>>()?;
    if batch.is_empty() {
        return Ok(Vec::new());
    }
    let plan = plan(db, vo)?;
    let uses: Vec<Vec<(usize, AttrUse)>> = plan
        .nodes
        .iter()
        .map(|pn| {
            bound
                .iter()
                .enumerate()
                .filter(|(_, b)| b.mentions(pn.attr))
                .map(|(i, b)| {
                    let u = AttrUse {
                        power: b.power(pn.attr),
                        group: b.groups_by(pn.attr),
                        filter: b.filter_on(pn.attr).cloned(),
                    };
                    (i, u)
                })
                .collect()
        })
        .collect();
    let ring = ProductRing::new(vec![GroupByRing::<S>::new(); batch.len()]);
    let attrs: Vec<usize> = plan.nodes.iter().map(|n| n.attr).collect();
    let out = run(&plan, &ring, |node, v| {
        if uses[node].is_empty() {
            return Lifted::One;
        }
        let mut e = ring.one();
        for (i, u) in &uses[node] {
            e[*i] = u.lift(attrs[node], v);
        }
        Lifted::Elem(e)
    });
    Ok(batch
        .iter()
        .zip(out)
        .map(|(spec, map)| AggResult::from_map(spec, map))
        .collect())
}

/// Evaluates one aggregate whose filter restricts the union of the filtered
/// attribute: rejected values are skipped during the traversal together with
/// everything below them.
pub fn eval_filtered<S: Scalar>(db: &Database, vo: &VariableOrder, spec: &AggregateSpec) -> Result<AggResult<S>> {
    let bound = spec.bind(db.catalog(), db.dict())?;
    let plan = plan(db, vo)?;
    let uses: Vec<Option<AttrUse>> = plan
        .nodes
        .iter()
        .map(|pn| {
            (bound.power(pn.attr) > 0 || bound.groups_by(pn.attr)).then(|| AttrUse {
                power: bound.power(pn.attr),
                group: bound.groups_by(pn.attr),
                filter: None,
            })
        })
        .collect();
    let filters: Vec<Option<&BoundFilter>> = plan.nodes.iter().map(|pn| bound.filter_on(pn.attr)).collect();
    let attrs: Vec<usize> = plan.nodes.iter().map(|n| n.attr).collect();
    let ring = GroupByRing::<S>::new();
    let out = run(&plan, &ring, |node, v| {
        if let Some(f) = filters[node] {
            if !f.admits(v) {
                return Lifted::Skip;
            }
        }
        match &uses[node] {
            Some(u) => Lifted::Elem(u.lift(attrs[node], v)),
            None => Lifted::One,
        }
    });
    Ok(AggResult::from_map(spec, out))
}

use std::collections::HashMap;

use smallvec::SmallVec;

use super::plan::Plan;
use crate::relcore::Value;

/// Consumer of a join traversal. For every variable-order node the engine
/// opens an accumulator, pushes each surviving value with the outputs of its
/// child subtrees, and closes it into an output.
pub(crate) trait Sink {
    type Out: Clone;
    type Acc;

    /// Values rejected here are skipped before their subtrees are explored.
    fn admit(&mut self, _node: usize, _v: &Value) -> bool {
        true
    }

    fn start(&mut self, node: usize) -> Self::Acc;

    fn push(&mut self, acc: &mut Self::Acc, node: usize, v: Value, weight: i64, children: &[Self::Out]);

    fn finish(&mut self, node: usize, acc: Self::Acc) -> Self::Out;

    /// Empty outputs prune the value that produced them.
    fn is_empty(&self, out: &Self::Out) -> bool;
}

type CacheKey = (usize, SmallVec<[Value; 4]>);

struct Traversal<'p, S: Sink> {
    plan: &'p Plan,
    ranges: Vec<(usize, usize)>,
    bindings: Vec<Value>,
    cache: Option<HashMap<CacheKey, S::Out>>,
}

/// Runs `sink` over the join of the plan's relations and returns the output
/// of the root node. With `cache` set, subtrees whose dependency set is a
/// strict subset of their ancestors are computed once per dependency binding.
pub(crate) fn traverse<S: Sink>(plan: &Plan, sink: &mut S, cache: bool) -> S::Out {
    let depth = plan.nodes.iter().map(|n| n.depth + 1).max().unwrap_or(0);
    let mut t = Traversal::<S> {
        plan,
        ranges: plan.tries.iter().map(|t| (0, t.len())).collect(),
        bindings: vec![Value::num(0.0); depth],
        cache: cache.then(HashMap::new),
    };
    t.visit(plan.order.root(), sink)
}

impl<S: Sink> Traversal<'_, S> {
    fn visit(&mut self, node: usize, sink: &mut S) -> S::Out {
        let plan = self.plan;
        let pn = &plan.nodes[node];
        let key = match &self.cache {
            Some(_) if pn.cacheable => {
                let k: CacheKey = (node, pn.deps.iter().map(|&d| self.bindings[d]).collect());
                if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&k)) {
                    return hit.clone();
                }
                Some(k)
            }
            _ => None,
        };

        let saved: SmallVec<[(usize, usize); 4]> =
            pn.rels.iter().map(|&(r, _)| self.ranges[r]).collect();
        let driver = (0..pn.rels.len())
            .min_by_key(|&i| saved[i].1 - saved[i].0)
            .expect("every attribute belongs to a relation");
        let (dr, dl) = pn.rels[driver];
        let dtrie = &plan.tries[dr];
        let (lo, hi) = saved[driver];

        let mut acc = sink.start(node);
        let mut outs: SmallVec<[S::Out; 4]> = SmallVec::new();
        let mut i = lo;
        while i < hi {
            let v = dtrie.at(i, dl);
            let j = dtrie.run_end(i, hi, dl);
            let here = i;
            i = j;
            if !sink.admit(node, &v) {
                continue;
            }
            let mut ok = true;
            for (k, &(r, l)) in pn.rels.iter().enumerate() {
                let range = if k == driver {
                    (here, j)
                } else {
                    let (a, b) = saved[k];
                    plan.tries[r].seek(a, b, l, v)
                };
                if range.0 == range.1 {
                    ok = false;
                    break;
                }
                self.ranges[r] = range;
            }
            if !ok {
                continue;
            }
            self.bindings[pn.depth] = v;
            let weight = pn
                .ending
                .iter()
                .map(|&r| plan.tries[r].mult(self.ranges[r].0))
                .product();
            outs.clear();
            for &c in &pn.children {
                let out = self.visit(c, sink);
                if sink.is_empty(&out) {
                    ok = false;
                    break;
                }
                outs.push(out);
            }
            if ok {
                sink.push(&mut acc, node, v, weight, &outs);
            }
        }
        for (k, &(r, _)) in pn.rels.iter().enumerate() {
            self.ranges[r] = saved[k];
        }
        let out = sink.finish(node, acc);
        if let (Some(k), Some(cache)) = (key, self.cache.as_mut()) {
            cache.insert(k, out.clone());
        }
        out
    }
}

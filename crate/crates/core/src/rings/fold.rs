use super::{CountingRing, LiftMap, Lifted, OpCounts, Ring};
use crate::frep::{FNode, FactorisedResult, NodeId};

/// Evaluates a factorised join as a ring expression: unions become sums,
/// value nodes the product of their lift, their child unions, and their
/// multiplicity. Shared unions are evaluated once.
pub fn ring_fold<R: Ring>(f: &FactorisedResult, ring: &R, lifts: &LiftMap<'_, R::Elem>) -> R::Elem {
    let order = f.order();
    let per_node: Vec<_> = (0..order.len()).map(|n| lifts.get(order.attr(n))).collect();
    let mut memo: Vec<Option<R::Elem>> = vec![None; f.nodes().len()];
    fold_union(f, f.root(), ring, &per_node, &mut memo)
}

/// [`ring_fold`] that also reports how many ring operations it performed.
pub fn ring_fold_counted<R: Ring + Clone>(
    f: &FactorisedResult,
    ring: &R,
    lifts: &LiftMap<'_, R::Elem>,
) -> (R::Elem, OpCounts) {
    let counting = CountingRing::new(ring.clone());
    let out = ring_fold(f, &counting, lifts);
    (out, counting.counts())
}

type NodeLift<'l, 'a, E> = Option<&'l (dyn Fn(&crate::relcore::Value) -> Lifted<E> + Send + Sync + 'a)>;

fn fold_union<R: Ring>(
    f: &FactorisedResult,
    u: NodeId,
    ring: &R,
    lifts: &[NodeLift<'_, '_, R::Elem>],
    memo: &mut Vec<Option<R::Elem>>,
) -> R::Elem {
    if let Some(e) = &memo[u] {
        return e.clone();
    }
    let FNode::Union { children, .. } = f.node(u) else {
        unreachable!("fold starts at unions")
    };
    let mut acc = ring.zero();
    for &vn in children {
        let FNode::Value {
            attr,
            value,
            weight,
            children: kids,
        } = f.node(vn)
        else {
            unreachable!("union children are values")
        };
        let mut term = match lifts[*attr].map_or(Lifted::One, |l| l(value)) {
            Lifted::Skip => continue,
            Lifted::One => None,
            Lifted::Elem(e) => Some(e),
        };
        for &k in kids {
            let sub = fold_union(f, k, ring, lifts, memo);
            term = Some(match term {
                None => sub,
                Some(t) => ring.times(&t, &sub),
            });
        }
        let term = term.unwrap_or_else(|| ring.one());
        let term = if *weight == 1 { term } else { ring.scale(&term, *weight) };
        ring.plus_assign(&mut acc, &term);
    }
    memo[u] = Some(acc.clone());
    acc
}

use crate::error::{Error, Result};
use crate::relcore::{AttrId, Catalog, Relation, Value};
use crate::vorder::VariableOrder;

/// A relation's tuples with columns reordered by variable-order depth and
/// rows sorted, so every bound prefix selects a contiguous row range.
#[derive(Clone, Debug)]
pub(crate) struct Trie {
    arity: usize,
    cells: Vec<Value>,
    mults: Vec<i64>,
}

impl Trie {
    fn new(relation: &Relation, columns: &[usize]) -> Self {
        let mut rows: Vec<(Vec<Value>, i64)> = relation
            .iter()
            .map(|(t, &m)| (columns.iter().map(|&c| t[c]).collect(), m))
            .collect();
        rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let arity = columns.len();
        let mut cells = Vec::with_capacity(rows.len() * arity);
        let mut mults = Vec::with_capacity(rows.len());
        for (r, m) in rows {
            cells.extend(r);
            mults.push(m);
        }
        Trie {
            arity,
            cells,
            mults,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.mults.len()
    }

    #[inline]
    pub(crate) fn at(&self, row: usize, level: usize) -> Value {
        self.cells[row * self.arity + level]
    }

    #[inline]
    pub(crate) fn mult(&self, row: usize) -> i64 {
        self.mults[row]
    }

    /// End of the run of rows starting at `lo` that share its value at
    /// `level`, searching no further than `hi`.
    pub(crate) fn run_end(&self, lo: usize, hi: usize, level: usize) -> usize {
        let v = self.at(lo, level);
        // exponential probe, then binary search
        let mut step = 1;
        let mut good = lo;
        while good + step < hi && self.at(good + step, level) == v {
            good += step;
            step *= 2;
        }
        let mut a = good + 1;
        let mut b = (good + step).min(hi);
        while a < b {
            let mid = (a + b) / 2;
            if self.at(mid, level) == v {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        a
    }

    /// Rows of `[lo, hi)` whose value at `level` equals `v`.
    pub(crate) fn seek(&self, lo: usize, hi: usize, level: usize, v: Value) -> (usize, usize) {
        let (mut a, mut b) = (lo, hi);
        while a < b {
            let mid = (a + b) / 2;
            if self.at(mid, level) < v {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        let start = a;
        let mut b = hi;
        while a < b {
            let mid = (a + b) / 2;
            if self.at(mid, level) <= v {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        (start, a)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct PlanNode {
    pub attr: AttrId,
    pub depth: usize,
    /// `(relation, trie level)` for every relation containing the attribute.
    pub rels: Vec<(usize, usize)>,
    /// Relations whose last trie level is this node.
    pub ending: Vec<usize>,
    /// Depths of the dependency-set ancestors.
    pub deps: Vec<usize>,
    pub cacheable: bool,
    pub children: Vec<usize>,
}

/// Relations compiled against an annotated variable order.
#[derive(Clone, Debug)]
pub(crate) struct Plan {
    pub order: VariableOrder,
    pub nodes: Vec<PlanNode>,
    pub tries: Vec<Trie>,
}

impl Plan {
    pub(crate) fn new(relations: &[&Relation], catalog: &Catalog, order: &VariableOrder) -> Result<Plan> {
        let schemas: Vec<_> = relations.iter().map(|r| r.schema()).collect();
        let order = if order.is_annotated() {
            let diags = order.validate(&schemas);
            if !diags.is_empty() {
                return Err(Error::VariableOrder(diags));
            }
            order.clone()
        } else {
            order.annotated(&schemas)?
        };
        let mut nodes: Vec<PlanNode> = order
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| {
                Ok(PlanNode {
                    attr: catalog.require(&n.attr)?,
                    depth: order.depth(id),
                    rels: Vec::new(),
                    ending: Vec::new(),
                    deps: order.dep_set_ids(id).iter().map(|&d| order.depth(d)).collect(),
                    cacheable: order.is_cacheable(id),
                    children: n.children.clone(),
                })
            })
            .collect::<Result<_>>()?;
        let mut tries = Vec::with_capacity(relations.len());
        for (r, rel) in relations.iter().enumerate() {
            let mut cols: Vec<(usize, usize)> = rel
                .schema()
                .attribute_names()
                .enumerate()
                .map(|(c, a)| (order.index_of(a).expect("validated"), c))
                .collect();
            cols.sort_by_key(|&(node, _)| order.depth(node));
            for (level, &(node, _)) in cols.iter().enumerate() {
                nodes[node].rels.push((r, level));
            }
            if let Some(&(last, _)) = cols.last() {
                nodes[last].ending.push(r);
            }
            let columns: Vec<usize> = cols.iter().map(|&(_, c)| c).collect();
            tries.push(Trie::new(rel, &columns));
        }
        Ok(Plan {
            order,
            nodes,
            tries,
        })
    }
}

//! Factorised representations of natural joins.
//!
//! A factorised join is a DAG of unions and products that follows a
//! variable order: a union lists the values of one attribute, and each value
//! is the product of the unions of its child attributes. A union whose
//! attribute depends on only some of its ancestors is built once per binding
//! of those ancestors and shared, which is where the representation gets
//! smaller than the flat join.

mod engine;
mod plan;

use std::collections::HashMap;
use std::fmt::Write as _;

pub(crate) use engine::{traverse, Sink};
pub(crate) use plan::Plan;

use crate::error::Result;
use crate::relcore::{Database, Dictionary, Relation, Tuple, Value};
use crate::vorder::VariableOrder;

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum FNode {
    /// Values of the variable-order node `attr`.
    Union { attr: usize, children: Vec<NodeId> },
    /// One value, with the product of the multiplicities of the tuples that
    /// end at it, and one union per variable-order child.
    Value {
        attr: usize,
        value: Value,
        weight: i64,
        children: Vec<NodeId>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    /// Share unions whose dependency set is a strict subset of their
    /// ancestors. Without it the result is a tree.
    pub cache: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { cache: true }
    }
}

/// A factorised join over an annotated variable order.
#[derive(Clone, Debug)]
pub struct FactorisedResult {
    nodes: Vec<FNode>,
    root: NodeId,
    order: VariableOrder,
}

struct Builder {
    nodes: Vec<FNode>,
}

impl Sink for Builder {
    type Out = NodeId;
    type Acc = Vec<NodeId>;

    fn start(&mut self, _node: usize) -> Vec<NodeId> {
        Vec::new()
    }

    fn push(&mut self, acc: &mut Vec<NodeId>, node: usize, v: Value, weight: i64, children: &[NodeId]) {
        self.nodes.push(FNode::Value {
            attr: node,
            value: v,
            weight,
            children: children.to_vec(),
        });
        acc.push(self.nodes.len() - 1);
    }

    fn finish(&mut self, node: usize, acc: Vec<NodeId>) -> NodeId {
        self.nodes.push(FNode::Union {
            attr: node,
            children: acc,
        });
        self.nodes.len() - 1
    }

    fn is_empty(&self, out: &NodeId) -> bool {
        matches!(&self.nodes[*out], FNode::Union { children, .. } if children.is_empty())
    }
}

/// Builds the factorised join of `db` over `order`. Relations that would
/// only contribute dangling values are pruned along the way, so every value
/// node takes part in at least one join tuple.
pub fn build_frep(db: &Database, order: &VariableOrder, options: BuildOptions) -> Result<FactorisedResult> {
    let relations: Vec<&Relation> = db.relations().iter().collect();
    build_frep_from(&relations, db.catalog(), order, options)
}

pub(crate) fn build_frep_from(
    relations: &[&Relation],
    catalog: &crate::relcore::Catalog,
    order: &VariableOrder,
    options: BuildOptions,
) -> Result<FactorisedResult> {
    let plan = Plan::new(relations, catalog, order)?;
    let mut builder = Builder { nodes: Vec::new() };
    let root = traverse(&plan, &mut builder, options.cache);
    Ok(FactorisedResult::compact(builder.nodes, root, plan.order))
}

impl FactorisedResult {
    /// Keeps only nodes reachable from the root, renumbered in DFS order.
    fn compact(nodes: Vec<FNode>, root: NodeId, order: VariableOrder) -> Self {
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        let mut out = Vec::new();
        fn go(id: NodeId, nodes: &[FNode], map: &mut HashMap<NodeId, NodeId>, out: &mut Vec<FNode>) -> NodeId {
            if let Some(&n) = map.get(&id) {
                return n;
            }
            let slot = out.len();
            map.insert(id, slot);
            out.push(nodes[id].clone());
            let kids: Vec<NodeId> = match &nodes[id] {
                FNode::Union { children, .. } | FNode::Value { children, .. } => {
                    children.iter().map(|&c| go(c, nodes, map, out)).collect()
                }
            };
            match &mut out[slot] {
                FNode::Union { children, .. } | FNode::Value { children, .. } => *children = kids,
            }
            slot
        }
        let root = go(root, &nodes, &mut map, &mut out);
        FactorisedResult {
            nodes: out,
            root,
            order,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &FNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[FNode] {
        &self.nodes
    }

    pub fn order(&self) -> &VariableOrder {
        &self.order
    }

    /// True if the join is empty.
    pub fn is_empty(&self) -> bool {
        matches!(&self.nodes[self.root], FNode::Union { children, .. } if children.is_empty())
    }

    /// Number of distinct value nodes; shared unions count once.
    pub fn count_values(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, FNode::Value { .. }))
            .count()
    }

    /// Number of union nodes.
    pub fn count_unions(&self) -> usize {
        self.nodes.len() - self.count_values()
    }

    /// Attribute names in column order of [`enumerate`](Self::enumerate):
    /// variable-order preorder.
    pub fn columns(&self) -> Vec<&str> {
        self.order.attribute_order()
    }

    /// The flat join tuples with their multiplicities, columns in
    /// [`columns`](Self::columns) order.
    pub fn enumerate(&self) -> Vec<(Tuple, i64)> {
        let preorder = self.order.preorder();
        let mut col = vec![0; self.order.len()];
        for (i, &n) in preorder.iter().enumerate() {
            col[n] = i;
        }
        let mut out = Vec::new();
        if self.is_empty() {
            return out;
        }
        let mut row = vec![Value::num(0.0); preorder.len()];
        let mut pending = vec![self.root];
        self.expand(&mut pending, &mut row, 1, &col, &mut out);
        out
    }

    fn expand(&self, pending: &mut Vec<NodeId>, row: &mut Tuple, mult: i64, col: &[usize], out: &mut Vec<(Tuple, i64)>) {
        let Some(u) = pending.pop() else {
            out.push((row.clone(), mult));
            return;
        };
        let FNode::Union { children, .. } = &self.nodes[u] else {
            unreachable!("pending holds unions")
        };
        for &vn in children {
            let FNode::Value {
                attr,
                value,
                weight,
                children: kids,
            } = &self.nodes[vn]
            else {
                unreachable!("union children are values")
            };
            row[col[*attr]] = *value;
            let mark = pending.len();
            pending.extend(kids.iter().rev());
            self.expand(pending, row, mult * weight, col, out);
            pending.truncate(mark);
        }
        pending.push(u);
    }

    /// The join as a relation (multiplicities summed), columns in
    /// [`columns`](Self::columns) order.
    pub fn to_tuples(&self) -> std::collections::BTreeMap<Tuple, i64> {
        let mut map = std::collections::BTreeMap::new();
        for (t, m) in self.enumerate() {
            *map.entry(t).or_insert(0) += m;
        }
        map.retain(|_, m| *m != 0);
        map
    }

    /// Indented text rendering. Unions shared by several parents are tagged
    /// `[#k]` where first printed and referenced as `-> [#k]` afterwards.
    pub fn outline(&self, dict: &Dictionary) -> String {
        let mut refs = vec![0usize; self.nodes.len()];
        refs[self.root] += 1;
        for n in &self.nodes {
            if let FNode::Value { children, .. } = n {
                for &c in children {
                    refs[c] += 1;
                }
            }
        }
        let mut tags: HashMap<NodeId, usize> = HashMap::new();
        let mut s = String::new();
        self.write_union(self.root, 0, dict, &refs, &mut tags, &mut s);
        s
    }

    fn write_union(
        &self,
        u: NodeId,
        indent: usize,
        dict: &Dictionary,
        refs: &[usize],
        tags: &mut HashMap<NodeId, usize>,
        s: &mut String,
    ) {
        let FNode::Union { attr, children } = &self.nodes[u] else {
            unreachable!()
        };
        let name = self.order.attr(*attr);
        let pad = "  ".repeat(indent);
        if let Some(tag) = tags.get(&u) {
            let _ = writeln!(s, "{pad}-> [#{tag}] {name}");
            return;
        }
        if refs[u] > 1 {
            let tag = tags.len();
            tags.insert(u, tag);
            let _ = writeln!(s, "{pad}U {name} [#{tag}]");
        } else {
            let _ = writeln!(s, "{pad}U {name}");
        }
        for &vn in children {
            let FNode::Value {
                value,
                weight,
                children: kids,
                ..
            } = &self.nodes[vn]
            else {
                unreachable!()
            };
            let w = if *weight == 1 {
                String::new()
            } else {
                format!(" (x{weight})")
            };
            let _ = writeln!(s, "{pad}  {}{w}", dict.display(name, value));
            for &k in kids {
                self.write_union(k, indent + 2, dict, refs, tags, s);
            }
        }
    }
}

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::relcore::Schema;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoNode {
    pub attr: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// A rooted tree over the join attributes.
///
/// After [`VariableOrder::annotated`] every node carries its dependency set
/// (the ancestors that it or one of its descendants shares a relation with)
/// and every relation is assigned to the deepest node among its attributes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableOrder {
    nodes: Vec<VoNode>,
    root: usize,
    dep_sets: Option<Vec<Vec<usize>>>,
    assignment: Option<Vec<(String, usize)>>,
}

impl VariableOrder {
    pub fn new(root_attr: impl Into<String>) -> Self {
        VariableOrder {
            nodes: vec![VoNode {
                attr: root_attr.into(),
                parent: None,
                children: Vec::new(),
            }],
            root: 0,
            dep_sets: None,
            assignment: None,
        }
    }

    /// Appends `attr` as the last child of node `parent`, returning its index.
    pub fn add_child(&mut self, parent: usize, attr: impl Into<String>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(VoNode {
            attr: attr.into(),
            parent: Some(parent),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        self.dep_sets = None;
        self.assignment = None;
        id
    }

    /// Builds an order from `(attribute, parent attribute)` pairs; exactly one
    /// pair has no parent. Children keep the order they are listed in.
    pub fn from_parents(pairs: &[(&str, Option<&str>)]) -> Result<Self> {
        let roots: Vec<_> = pairs.iter().filter(|(_, p)| p.is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::VariableOrder(vec![format!(
                "expected exactly one root, found {}",
                roots.len()
            )]));
        }
        let mut vo = VariableOrder::new(roots[0].0);
        let mut placed: HashMap<&str, usize> = HashMap::from([(roots[0].0, 0)]);
        let mut done: Vec<bool> = pairs.iter().map(|(_, p)| p.is_none()).collect();
        loop {
            let mut progress = false;
            for (i, &(attr, parent)) in pairs.iter().enumerate() {
                if done[i] {
                    continue;
                }
                if let Some(&p) = placed.get(parent.unwrap()) {
                    if placed.contains_key(attr) {
                        return Err(Error::VariableOrder(vec![format!(
                            "attribute `{attr}` placed twice"
                        )]));
                    }
                    placed.insert(attr, vo.add_child(p, attr));
                    done[i] = true;
                    progress = true;
                }
            }
            if done.iter().all(|&d| d) {
                break;
            }
            if !progress {
                return Err(Error::VariableOrder(vec![
                    "parent links do not form a tree rooted at the root".to_string(),
                ]));
            }
        }
        Ok(vo)
    }

    /// Parses the nested form `dish(day(customer), item(price))`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = OrderParser {
            s: text.as_bytes(),
            pos: 0,
        };
        let root = p.ident()?;
        let mut vo = VariableOrder::new(root);
        p.children(&mut vo, 0)?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(vo)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[VoNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &VoNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, attr: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.attr == attr)
    }

    pub fn attr(&self, id: usize) -> &str {
        &self.nodes[id].attr
    }

    /// Ancestors of `id`, root first.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.nodes[p].parent;
        }
        out.reverse();
        out
    }

    pub fn depth(&self, id: usize) -> usize {
        self.ancestors(id).len()
    }

    /// Node ids in pre-order (parents before children, children in order).
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    /// Attribute names in pre-order; the column order of enumerated tuples.
    pub fn attribute_order(&self) -> Vec<&str> {
        self.preorder().into_iter().map(|n| self.attr(n)).collect()
    }

    fn subtree(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(&self.nodes[n].children);
        }
        out
    }

    /// Checks the order against the relation schemas. An empty result means
    /// the order is valid: every relation attribute occurs exactly once, every
    /// node is some relation's attribute, and each relation's attributes lie
    /// on one root-to-leaf path.
    pub fn validate(&self, schemas: &[&Schema]) -> Vec<String> {
        let mut diags = Vec::new();
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if seen.insert(n.attr.as_str(), i).is_some() {
                diags.push(format!("attribute `{}` occurs more than once", n.attr));
            }
        }
        for n in &self.nodes {
            if !schemas.iter().any(|s| s.contains(&n.attr)) {
                diags.push(format!("attribute `{}` belongs to no relation", n.attr));
            }
        }
        for s in schemas {
            let mut ids = Vec::new();
            for a in s.attribute_names() {
                match seen.get(a) {
                    Some(&id) => ids.push(id),
                    None => diags.push(format!(
                        "attribute `{a}` of relation `{}` is missing from the order",
                        s.name()
                    )),
                }
            }
            if let Some(&deepest) = ids.iter().max_by_key(|&&i| self.depth(i)) {
                let path: BTreeSet<usize> = self
                    .ancestors(deepest)
                    .into_iter()
                    .chain([deepest])
                    .collect();
                let off: Vec<&str> = ids
                    .iter()
                    .filter(|i| !path.contains(i))
                    .map(|&i| self.attr(i))
                    .collect();
                if !off.is_empty() {
                    diags.push(format!(
                        "attributes of relation `{}` are not on one root-to-leaf path: {} not above `{}`",
                        s.name(),
                        off.join(", "),
                        self.attr(deepest)
                    ));
                }
            }
        }
        diags
    }

    /// Validates against `schemas` and fills dependency sets and the
    /// relation assignment.
    pub fn annotated(&self, schemas: &[&Schema]) -> Result<VariableOrder> {
        let diags = self.validate(schemas);
        if !diags.is_empty() {
            return Err(Error::VariableOrder(diags));
        }
        let mut vo = self.clone();
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.attr.as_str(), i))
            .collect();
        // co[v] = attributes that share some relation with v
        let mut co: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.nodes.len()];
        let mut assignment = Vec::new();
        for s in schemas {
            let ids: Vec<usize> = s.attribute_names().map(|a| index[a]).collect();
            for &a in &ids {
                co[a].extend(ids.iter().copied().filter(|&b| b != a));
            }
            let deepest = *ids.iter().max_by_key(|&&i| self.depth(i)).unwrap();
            assignment.push((s.name().to_string(), deepest));
        }
        let dep_sets = (0..self.nodes.len())
            .map(|v| {
                let reach: BTreeSet<usize> = self
                    .subtree(v)
                    .into_iter()
                    .flat_map(|d| co[d].iter().copied())
                    .collect();
                self.ancestors(v)
                    .into_iter()
                    .filter(|a| reach.contains(a))
                    .collect()
            })
            .collect();
        vo.dep_sets = Some(dep_sets);
        vo.assignment = Some(assignment);
        Ok(vo)
    }

    pub fn is_annotated(&self) -> bool {
        self.dep_sets.is_some()
    }

    /// Dependency set of node `id` (ancestor node ids, root first). Panics if
    /// the order has not been annotated.
    pub fn dep_set_ids(&self, id: usize) -> &[usize] {
        &self.dep_sets.as_ref().expect("variable order not annotated")[id]
    }

    /// Dependency set of `attr` as attribute names, root first.
    pub fn dep_set(&self, attr: &str) -> Option<Vec<&str>> {
        let id = self.index_of(attr)?;
        let deps = self.dep_sets.as_ref()?;
        Some(deps[id].iter().map(|&d| self.attr(d)).collect())
    }

    /// Whether the subtree at `id` can be shared across different ancestor
    /// values: its dependency set is a strict subset of its ancestors.
    pub fn is_cacheable(&self, id: usize) -> bool {
        self.dep_set_ids(id).len() < self.depth(id)
    }

    /// Relation name to the node of its deepest attribute.
    pub fn relation_assignment(&self) -> Option<&[(String, usize)]> {
        self.assignment.as_deref()
    }
}

impl fmt::Display for VariableOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(vo: &VariableOrder, n: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str(vo.attr(n))?;
            let ch = &vo.nodes[n].children;
            if !ch.is_empty() {
                f.write_str("(")?;
                for (i, &c) in ch.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    go(vo, c, f)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
        go(self, self.root, f)
    }
}

struct OrderParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl OrderParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::VariableOrder(vec![format!("{msg} at offset {}", self.pos)])
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && !matches!(self.s[self.pos], b'(' | b')' | b',')
            && !self.s[self.pos].is_ascii_whitespace()
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected attribute name"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn children(&mut self, vo: &mut VariableOrder, parent: usize) -> Result<()> {
        self.skip_ws();
        if self.s.get(self.pos) != Some(&b'(') {
            return Ok(());
        }
        self.pos += 1;
        loop {
            let name = self.ident()?;
            let id = vo.add_child(parent, name);
            self.children(vo, id)?;
            self.skip_ws();
            match self.s.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(());
                }
                _ => return Err(self.err("expected `,` or `)`")),
            }
        }
    }
}

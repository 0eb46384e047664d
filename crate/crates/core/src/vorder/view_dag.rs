use std::collections::HashMap;

use super::aggregate::{AggregateSpec, Filter};
use super::join_tree::{JoinTree, RootedJoinTree};
use crate::error::{Error, Result};
use crate::relcore::{AttrKind, Schema};

pub type ViewId = usize;

/// The part of an aggregate that refers only to attributes owned inside one
/// join-tree subtree. An attribute is owned by the node nearest the root
/// whose relation contains it. Attribute lists are sorted, so equal
/// restrictions compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RestrictedSpec {
    pub product: Vec<String>,
    pub group_by: Vec<String>,
    pub filter: Option<Filter>,
}

impl RestrictedSpec {
    pub fn is_count(&self) -> bool {
        self.product.is_empty() && self.group_by.is_empty() && self.filter.is_none()
    }

    pub fn as_spec(&self) -> AggregateSpec {
        AggregateSpec {
            product: self.product.clone(),
            group_by: self.group_by.clone(),
            filter: self.filter.clone(),
        }
    }
}

/// One partial aggregate at a join-tree node. `children[i]` is the view it
/// reads at `tree.children[node][i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewDef {
    pub node: usize,
    pub spec: RestrictedSpec,
    pub children: Vec<ViewId>,
    pub parents: Vec<ViewId>,
}

/// Views computed together in a single scan of their node's relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewGroup {
    pub node: usize,
    pub views: Vec<ViewId>,
    /// Height of the node above the deepest leaf below it; groups of equal
    /// height never depend on each other.
    pub level: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecomposeOptions {
    /// Merge views with equal node and restricted spec.
    pub merge: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { merge: true }
    }
}

/// The shared view DAG of an aggregate batch over a rooted join tree.
#[derive(Clone, Debug)]
pub struct ViewDag {
    pub tree: RootedJoinTree,
    pub batch: Vec<AggregateSpec>,
    pub views: Vec<ViewDef>,
    /// Root view answering `batch[i]`.
    pub outputs: Vec<ViewId>,
    /// In dependency order: a group comes after every group it reads from.
    pub groups: Vec<ViewGroup>,
}

impl ViewDag {
    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn views_at(&self, node: usize) -> impl Iterator<Item = ViewId> + '_ {
        self.views
            .iter()
            .enumerate()
            .filter(move |(_, v)| v.node == node)
            .map(|(i, _)| i)
    }

    /// Views at nodes without children.
    pub fn leaf_views(&self) -> usize {
        self.views
            .iter()
            .filter(|v| self.tree.children[v.node].is_empty())
            .count()
    }

    /// Groups partitioned by level, lowest first.
    pub fn levels(&self) -> Vec<Vec<&ViewGroup>> {
        let top = self.groups.iter().map(|g| g.level).max().map_or(0, |l| l + 1);
        let mut out = vec![Vec::new(); top];
        for g in &self.groups {
            out[g.level].push(g);
        }
        out
    }

    /// Kahn's algorithm over the child-to-parent edges; `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<ViewId>> {
        let mut indeg: Vec<usize> = self.views.iter().map(|v| v.children.len()).collect();
        let mut ready: Vec<ViewId> = (0..self.views.len()).filter(|&v| indeg[v] == 0).collect();
        let mut out = Vec::with_capacity(self.views.len());
        while let Some(v) = ready.pop() {
            out.push(v);
            for &p in &self.views[v].parents {
                indeg[p] -= 1;
                if indeg[p] == 0 {
                    ready.push(p);
                }
            }
        }
        (out.len() == self.views.len()).then_some(out)
    }
}

/// Decomposes each aggregate top-down over the join tree rooted at `root`.
///
/// The full aggregate sits at the root; every other node gets the
/// restriction of the aggregate to the attributes owned in its subtree, which
/// is a plain count when the subtree owns none of them. With merging on,
/// restrictions that coincide at a node become one view.
pub fn decompose_aggregates(
    batch: &[AggregateSpec],
    jt: &JoinTree,
    root: usize,
    schemas: &[&Schema],
    options: DecomposeOptions,
) -> Result<ViewDag> {
    let tree = jt.rooted(root, schemas)?;
    let kinds: HashMap<&str, AttrKind> = schemas
        .iter()
        .flat_map(|s| s.attributes().iter().map(|a| (a.name.as_str(), a.kind)))
        .collect();
    for spec in batch {
        for a in spec.attributes() {
            if !kinds.contains_key(a) {
                return Err(Error::UnknownAttribute(a.to_string()));
            }
        }
        if let Some(a) = spec.product.iter().find(|a| kinds[a.as_str()] != AttrKind::Numeric) {
            return Err(Error::Type(format!("cannot multiply categorical attribute `{a}`")));
        }
        if let Some(a) = spec.group_by.iter().find(|a| kinds[a.as_str()] != AttrKind::Categorical) {
            return Err(Error::Type(format!("group-by attribute `{a}` must be categorical")));
        }
    }
    let owner: HashMap<&str, usize> = kinds
        .keys()
        .map(|&a| (a, tree.owner(a).expect("attribute has an owner")))
        .collect();
    let in_subtree: Vec<Vec<bool>> = (0..tree.len())
        .map(|v| {
            let mut mask = vec![false; tree.len()];
            for n in tree.subtree(v) {
                mask[n] = true;
            }
            mask
        })
        .collect();

    let mut b = Builder {
        tree: &tree,
        owner: &owner,
        in_subtree: &in_subtree,
        merge: options.merge,
        views: Vec::new(),
        index: HashMap::new(),
    };
    let outputs = batch.iter().map(|s| b.view(root, s)).collect();
    let mut views = b.views;
    for id in 0..views.len() {
        for c in views[id].children.clone() {
            views[c].parents.push(id);
        }
    }
    let mut height = vec![0usize; tree.len()];
    for &v in &tree.postorder {
        height[v] = tree.children[v].iter().map(|&c| height[c] + 1).max().unwrap_or(0);
    }
    let groups = tree
        .postorder
        .iter()
        .filter_map(|&node| {
            let members: Vec<ViewId> = (0..views.len()).filter(|&i| views[i].node == node).collect();
            (!members.is_empty()).then(|| ViewGroup {
                node,
                views: members,
                level: height[node],
            })
        })
        .collect();
    Ok(ViewDag {
        tree,
        batch: batch.to_vec(),
        views,
        outputs,
        groups,
    })
}

struct Builder<'a> {
    tree: &'a RootedJoinTree,
    owner: &'a HashMap<&'a str, usize>,
    in_subtree: &'a [Vec<bool>],
    merge: bool,
    views: Vec<ViewDef>,
    index: HashMap<(usize, RestrictedSpec), ViewId>,
}

impl Builder<'_> {
    fn restrict(&self, node: usize, spec: &AggregateSpec) -> RestrictedSpec {
        let inside = |a: &String| self.in_subtree[node][self.owner[a.as_str()]];
        let mut product: Vec<String> = spec.product.iter().filter(|a| inside(a)).cloned().collect();
        product.sort();
        let mut group_by: Vec<String> = spec.group_by.iter().filter(|a| inside(a)).cloned().collect();
        group_by.sort();
        group_by.dedup();
        let filter = spec.filter.clone().filter(|f| inside(&f.attr));
        RestrictedSpec {
            product,
            group_by,
            filter,
        }
    }

    fn view(&mut self, node: usize, spec: &AggregateSpec) -> ViewId {
        let restricted = self.restrict(node, spec);
        if self.merge {
            if let Some(&id) = self.index.get(&(node, restricted.clone())) {
                return id;
            }
        }
        let children = self.tree.children[node]
            .clone()
            .into_iter()
            .map(|c| self.view(c, spec))
            .collect();
        let id = self.views.len();
        self.views.push(ViewDef {
            node,
            spec: restricted.clone(),
            children,
            parents: Vec::new(),
        });
        if self.merge {
            self.index.insert((node, restricted), id);
        }
        id
    }
}

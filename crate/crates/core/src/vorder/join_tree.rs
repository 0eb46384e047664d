use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::relcore::{Database, Schema};

/// An undirected tree with one node per relation. Two adjacent nodes are
/// labelled by the attributes their relations share.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTree {
    relations: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl JoinTree {
    /// Builds a tree over `relations` from named edges. Rejects unknown
    /// names, disconnected graphs and cycles.
    pub fn new(relations: Vec<String>, edges: &[(&str, &str)]) -> Result<Self> {
        let index: HashMap<&str, usize> = relations
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_str(), i))
            .collect();
        if index.len() != relations.len() {
            return Err(Error::JoinTree("duplicate relation".to_string()));
        }
        let mut ids = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let ia = *index
                .get(a)
                .ok_or_else(|| Error::JoinTree(format!("unknown relation `{a}` in edge")))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| Error::JoinTree(format!("unknown relation `{b}` in edge")))?;
            if ia == ib {
                return Err(Error::JoinTree(format!("self loop on `{a}`")));
            }
            ids.push((ia, ib));
        }
        let jt = JoinTree {
            relations,
            edges: ids,
        };
        jt.check_tree()?;
        Ok(jt)
    }

    fn check_tree(&self) -> Result<()> {
        let n = self.relations.len();
        if n == 0 {
            return Err(Error::JoinTree("no relations".to_string()));
        }
        let mut uf = UnionFind::new(n);
        for &(a, b) in &self.edges {
            if !uf.union(a, b) {
                return Err(Error::JoinTree(format!(
                    "edge {}–{} closes a cycle; cyclic join trees are not supported",
                    self.relations[a], self.relations[b]
                )));
            }
        }
        if self.edges.len() != n - 1 {
            return Err(Error::JoinTree("join tree is not connected".to_string()));
        }
        Ok(())
    }

    /// Infers a join tree as a maximum-weight spanning tree, weighting each
    /// pair of relations by the number of attributes they share, and checks
    /// the running-intersection property. Fails for cyclic queries.
    pub fn infer(schemas: &[&Schema]) -> Result<Self> {
        let n = schemas.len();
        let mut candidates = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = shared(schemas[i], schemas[j]).len();
                candidates.push((w, i, j));
            }
        }
        // heaviest first; ties by position for determinism
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut uf = UnionFind::new(n);
        let mut edges = Vec::new();
        for (_, i, j) in candidates {
            if uf.union(i, j) {
                edges.push((i, j));
            }
        }
        let jt = JoinTree {
            relations: schemas.iter().map(|s| s.name().to_string()).collect(),
            edges,
        };
        jt.check_tree()?;
        jt.validate(schemas)?;
        Ok(jt)
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn index_of(&self, relation: &str) -> Option<usize> {
        self.relations.iter().position(|r| r == relation)
    }

    /// Checks that the nodes are exactly the given relations and that the
    /// running-intersection property holds.
    pub fn validate(&self, schemas: &[&Schema]) -> Result<()> {
        let names: BTreeSet<&str> = schemas.iter().map(|s| s.name()).collect();
        let nodes: BTreeSet<&str> = self.relations.iter().map(String::as_str).collect();
        if names != nodes {
            return Err(Error::JoinTree(format!(
                "join tree nodes {nodes:?} differ from relations {names:?}"
            )));
        }
        let by_name: HashMap<&str, &Schema> = schemas.iter().map(|s| (s.name(), *s)).collect();
        let node_schema: Vec<&Schema> = self.relations.iter().map(|r| by_name[r.as_str()]).collect();
        let attrs: BTreeSet<&str> = schemas.iter().flat_map(|s| s.attribute_names()).collect();
        for a in attrs {
            let holders = node_schema.iter().filter(|s| s.contains(a)).count();
            let links = self
                .edges
                .iter()
                .filter(|&&(x, y)| node_schema[x].contains(a) && node_schema[y].contains(a))
                .count();
            if links + 1 != holders {
                return Err(Error::JoinTree(format!(
                    "relations containing `{a}` are not connected in the join tree (cyclic query?)"
                )));
            }
        }
        Ok(())
    }

    /// Largest relation by distinct tuples; ties go to the smallest name.
    pub fn default_root(&self, db: &Database) -> usize {
        (0..self.relations.len())
            .max_by(|&a, &b| {
                let la = db.relation(&self.relations[a]).map_or(0, |r| r.len());
                let lb = db.relation(&self.relations[b]).map_or(0, |r| r.len());
                la.cmp(&lb)
                    .then_with(|| self.relations[b].cmp(&self.relations[a]))
            })
            .unwrap_or(0)
    }

    /// Orients the tree at `root`.
    pub fn rooted(&self, root: usize, schemas: &[&Schema]) -> Result<RootedJoinTree> {
        self.validate(schemas)?;
        let by_name: HashMap<&str, &Schema> = schemas.iter().map(|s| (s.name(), *s)).collect();
        let n = self.relations.len();
        if root >= n {
            return Err(Error::JoinTree(format!("root index {root} out of range")));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let attrs: Vec<Vec<String>> = self
            .relations
            .iter()
            .map(|r| by_name[r.as_str()].attribute_names().map(String::from).collect())
            .collect();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![root];
        let mut seen = vec![false; n];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            preorder.push(v);
            for &w in adj[v].iter().rev() {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    stack.push(w);
                }
            }
        }
        for &v in &preorder {
            if let Some(p) = parent[v] {
                children[p].push(v);
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        let conn = (0..n)
            .map(|v| match parent[v] {
                Some(p) => attrs[v]
                    .iter()
                    .filter(|a| attrs[p].contains(a))
                    .cloned()
                    .collect(),
                None => Vec::new(),
            })
            .collect();
        let mut postorder = preorder.clone();
        postorder.reverse();
        Ok(RootedJoinTree {
            root,
            relations: self.relations.clone(),
            parent,
            children,
            postorder,
            conn,
            attrs,
        })
    }
}

/// A join tree oriented at a root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedJoinTree {
    pub root: usize,
    pub relations: Vec<String>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Every child appears before its parent.
    pub postorder: Vec<usize>,
    /// Attributes a node shares with its parent, in the node's schema order.
    pub conn: Vec<Vec<String>>,
    pub attrs: Vec<Vec<String>>,
}

impl RootedJoinTree {
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        (0..self.len()).map(|v| self.path_to_root(v).len()).max().unwrap_or(0)
    }

    /// `node`, its parent, and so on up to the root.
    pub fn path_to_root(&self, node: usize) -> Vec<usize> {
        let mut out = vec![node];
        let mut cur = self.parent[node];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent[p];
        }
        out
    }

    pub fn subtree(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(&self.children[v]);
        }
        out
    }

    /// The node nearest the root whose relation contains `attr`.
    pub fn owner(&self, attr: &str) -> Option<usize> {
        (0..self.len())
            .filter(|&v| self.attrs[v].iter().any(|a| a == attr))
            .min_by_key(|&v| self.path_to_root(v).len())
    }
}

fn shared(a: &Schema, b: &Schema) -> Vec<String> {
    a.attribute_names()
        .filter(|x| b.contains(x))
        .map(String::from)
        .collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

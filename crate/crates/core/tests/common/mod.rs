//! Shared helpers for the integration tests: a random acyclic database
//! generator, random aggregates, variable-order enumeration, and a
//! brute-force oracle that joins by nested loops in exact rationals.
#![allow(dead_code)]

use std::collections::BTreeMap;

use factorml::evaluator::AggResult;
use factorml::vorder::{AggregateSpec, CmpOp, Filter, JoinTree, VariableOrder};
use factorml::{AttrKind, Attribute, Database, Dictionary, Rational, Relation, Schema, Value};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

/// A generated database with a join tree whose edges follow the generation.
pub struct RandomDb {
    pub db: Database,
    pub join_tree: JoinTree,
}

/// 2 to 4 relations, each new one sharing one or two attributes with an
/// earlier one, so the schema is acyclic by construction. At most
/// `max_tuples` tuples per relation over small domains, so joins are dense.
pub fn random_db(rng: &mut impl Rng, max_tuples: usize) -> RandomDb {
    let nrel = rng.gen_range(2..=4);
    let mut attrs: Vec<Attribute> = Vec::new();
    let fresh = |rng: &mut dyn rand::RngCore, attrs: &mut Vec<Attribute>| {
        let name = format!("a{}", attrs.len());
        let kind = if rng.gen_bool(0.3) { AttrKind::Categorical } else { AttrKind::Numeric };
        attrs.push(Attribute::new(name, kind));
        attrs.len() - 1
    };
    let mut rel_attrs: Vec<Vec<usize>> = Vec::new();
    let mut parents: Vec<Option<usize>> = Vec::new();
    for r in 0..nrel {
        let mut mine = Vec::new();
        let parent = if r == 0 { None } else { Some(rng.gen_range(0..r)) };
        if let Some(p) = parent {
            let mut pool = rel_attrs[p].clone();
            pool.shuffle(rng);
            let k = rng.gen_range(1..=pool.len().min(2));
            mine.extend(&pool[..k]);
        }
        let own = rng.gen_range(if r == 0 { 1 } else { 0 }..=2);
        for _ in 0..own {
            mine.push(fresh(rng, &mut attrs));
        }
        if mine.is_empty() {
            mine.push(fresh(rng, &mut attrs));
        }
        rel_attrs.push(mine);
        parents.push(parent);
    }

    let mut dict = Dictionary::new();
    let domain = rng.gen_range(2..=4);
    let mut relations = Vec::new();
    for (r, ids) in rel_attrs.iter().enumerate() {
        let schema = Schema::new(format!("R{r}"), ids.iter().map(|&i| attrs[i].clone()).collect()).unwrap();
        let mut rel = Relation::new(schema);
        let n = rng.gen_range(1..=max_tuples);
        for _ in 0..n {
            let tuple = ids
                .iter()
                .map(|&i| {
                    let v = rng.gen_range(0..domain);
                    match attrs[i].kind {
                        AttrKind::Numeric => Value::num(v as f64 * 0.5 - 0.5),
                        AttrKind::Categorical => dict.intern(&attrs[i].name, &format!("c{v}")),
                    }
                })
                .collect();
            rel.insert(tuple, rng.gen_range(1..=3)).unwrap();
        }
        relations.push(rel);
    }
    let names: Vec<String> = (0..nrel).map(|r| format!("R{r}")).collect();
    let edge_names: Vec<(String, String)> = parents
        .iter()
        .enumerate()
        .filter_map(|(r, p)| p.map(|p| (names[p].clone(), names[r].clone())))
        .collect();
    let edges: Vec<(&str, &str)> = edge_names.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let join_tree = JoinTree::new(names, &edges).unwrap();
    RandomDb {
        db: Database::new(relations, dict).unwrap(),
        join_tree,
    }
}

pub fn attribute_names(db: &Database) -> Vec<String> {
    db.catalog().names().to_vec()
}

fn numeric(db: &Database) -> Vec<String> {
    let c = db.catalog();
    (0..c.len()).filter(|&i| c.kind(i) == AttrKind::Numeric).map(|i| c.name(i).to_string()).collect()
}

fn categorical(db: &Database) -> Vec<String> {
    let c = db.catalog();
    (0..c.len()).filter(|&i| c.kind(i) == AttrKind::Categorical).map(|i| c.name(i).to_string()).collect()
}

/// A random aggregate: a product of up to three numeric attributes (with
/// repetition), up to two categorical group-by attributes and an optional
/// filter.
pub fn random_spec(rng: &mut impl Rng, db: &Database) -> AggregateSpec {
    let nums = numeric(db);
    let cats = categorical(db);
    let mut spec = AggregateSpec::count();
    if !nums.is_empty() {
        for _ in 0..rng.gen_range(0..=3) {
            spec.product.push(nums.choose(rng).unwrap().clone());
        }
    }
    if !cats.is_empty() && rng.gen_bool(0.4) {
        let mut pool = cats.clone();
        pool.shuffle(rng);
        pool.truncate(rng.gen_range(1..=pool.len().min(2)));
        spec.group_by = pool;
    }
    if rng.gen_bool(0.4) {
        spec.filter = Some(random_filter(rng, db));
    }
    spec
}

pub fn random_filter(rng: &mut impl Rng, db: &Database) -> Filter {
    let c = db.catalog();
    let a = rng.gen_range(0..c.len());
    let name = c.name(a).to_string();
    match c.kind(a) {
        AttrKind::Numeric => {
            let op = *[CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt].choose(rng).unwrap();
            Filter::cmp(name, op, rng.gen_range(0..4) as f64 * 0.5 - 0.5)
        }
        AttrKind::Categorical => {
            let k = db.dict().cardinality(&name);
            let mut vals: Vec<String> = (0..k as u32)
                .map(|i| db.dict().resolve(&name, i).unwrap().to_string())
                .collect();
            vals.shuffle(rng);
            vals.truncate(rng.gen_range(1..=vals.len().max(1)));
            Filter::is_in(name, &vals)
        }
    }
}

/// Every variable order over the database's attributes (at most `limit` of
/// them) that is valid for its schemas.
pub fn all_variable_orders(db: &Database, limit: usize) -> Vec<VariableOrder> {
    let names = attribute_names(db);
    let n = names.len();
    assert!(n <= 6, "exhaustive enumeration is for small schemas");
    let schemas = db.schemas();
    let mut out = Vec::new();
    // parent[i] in 0..=n, where n means "root"
    let mut parent = vec![0usize; n];
    loop {
        if let Some(vo) = order_from_parents(&names, &parent) {
            if vo.validate(&schemas).is_empty() {
                out.push(vo);
                if out.len() >= limit {
                    return out;
                }
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            parent[i] += 1;
            if parent[i] <= n {
                break;
            }
            parent[i] = 0;
            i += 1;
        }
    }
}

fn order_from_parents(names: &[String], parent: &[usize]) -> Option<VariableOrder> {
    let n = names.len();
    if (0..n).filter(|&i| parent[i] == n).count() != 1 || (0..n).any(|i| parent[i] == i) {
        return None;
    }
    let pairs: Vec<(&str, Option<&str>)> = (0..n)
        .map(|i| (names[i].as_str(), (parent[i] < n).then(|| names[parent[i]].as_str())))
        .collect();
    VariableOrder::from_parents(&pairs).ok()
}

/// A random valid variable order: random parent links by rejection, falling
/// back to a random chain, which is always valid.
pub fn random_variable_order(rng: &mut impl Rng, db: &Database) -> VariableOrder {
    let names = attribute_names(db);
    let n = names.len();
    let schemas = db.schemas();
    for _ in 0..200 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        // each node hangs under an earlier node of the permutation
        let mut parent = vec![n; n];
        for k in 1..n {
            parent[perm[k]] = perm[rng.gen_range(0..k)];
        }
        if let Some(vo) = order_from_parents(&names, &parent) {
            if vo.validate(&schemas).is_empty() {
                return vo;
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut parent = vec![n; n];
    for k in 1..n {
        parent[perm[k]] = perm[k - 1];
    }
    order_from_parents(&names, &parent).unwrap()
}

pub fn rational(v: f64) -> Rational {
    Rational::from_float(v).unwrap()
}

/// The natural join by nested loops: each tuple is a map from attribute name
/// to value, weighted by the product of multiplicities.
pub fn oracle_join(db: &Database) -> Vec<(BTreeMap<String, Value>, i64)> {
    let mut partial: Vec<(BTreeMap<String, Value>, i64)> = vec![(BTreeMap::new(), 1)];
    for rel in db.relations() {
        let names: Vec<String> = rel.schema().attribute_names().map(String::from).collect();
        let mut next = Vec::new();
        for (assign, w) in &partial {
            for (t, &m) in rel.iter() {
                let consistent = names.iter().zip(t).all(|(a, v)| assign.get(a).map_or(true, |x| x == v));
                if consistent {
                    let mut a = assign.clone();
                    for (n, v) in names.iter().zip(t) {
                        a.insert(n.clone(), v.clone());
                    }
                    next.push((a, w * m));
                }
            }
        }
        partial = next;
    }
    partial
}

/// The join as a bag keyed by tuples in the given column order.
pub fn oracle_bag(db: &Database, columns: &[&str]) -> BTreeMap<Vec<Value>, i64> {
    let mut out = BTreeMap::new();
    for (a, w) in oracle_join(db) {
        let t: Vec<Value> = columns.iter().map(|c| a[*c].clone()).collect();
        *out.entry(t).or_insert(0) += w;
    }
    out.retain(|_, w| *w != 0);
    out
}

fn filter_holds(f: &Filter, v: &Value, dict: &Dictionary) -> bool {
    match v {
        Value::Num(x) => {
            let x = x.0;
            let lits: Vec<f64> = f.values.iter().map(|s| s.parse().unwrap()).collect();
            match f.op {
                CmpOp::Lt => x < lits[0],
                CmpOp::Le => x <= lits[0],
                CmpOp::Eq => x == lits[0],
                CmpOp::Ge => x >= lits[0],
                CmpOp::Gt => x > lits[0],
                CmpOp::In => lits.contains(&x),
            }
        }
        Value::Cat(_) => {
            let text = dict.display(&f.attr, v);
            f.values.iter().any(|s| *s == text)
        }
    }
}

/// Group label to value; an ungrouped aggregate uses the empty label.
pub type Groups = BTreeMap<Vec<(String, String)>, Rational>;

/// Evaluates an aggregate over the nested-loop join.
pub fn oracle_aggregate(db: &Database, join: &[(BTreeMap<String, Value>, i64)], spec: &AggregateSpec) -> Groups {
    let dict = db.dict();
    let mut out = Groups::new();
    for (a, w) in join {
        if let Some(f) = &spec.filter {
            if !filter_holds(f, &a[&f.attr], dict) {
                continue;
            }
        }
        let mut term = Rational::from_integer((*w).into());
        for p in &spec.product {
            term *= rational(a[p].as_f64().unwrap());
        }
        let mut key: Vec<(String, String)> = spec.group_by.iter().map(|g| (g.clone(), dict.display(g, &a[g]))).collect();
        key.sort();
        *out.entry(key).or_insert_with(Rational::zero) += term;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// A library result keyed by group labels.
pub fn labelled<S: factorml::Scalar>(db: &Database, r: &AggResult<S>) -> BTreeMap<Vec<(String, String)>, S> {
    let mut out = BTreeMap::new();
    for (key, v) in r.to_map().iter() {
        let mut label: Vec<(String, String)> = key
            .iter()
            .map(|(a, val)| {
                let name = db.catalog().name(*a).to_string();
                let text = db.dict().display(&name, val);
                (name, text)
            })
            .collect();
        label.sort();
        out.insert(label, v.clone());
    }
    out
}

/// A library result in the oracle's shape.
pub fn to_groups(db: &Database, r: &AggResult<Rational>) -> Groups {
    let mut out = labelled(db, r);
    out.retain(|_, v| !v.is_zero());
    out
}

pub fn one() -> Rational {
    Rational::one()
}

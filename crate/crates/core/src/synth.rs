//! Small fixed datasets and a seeded star-schema generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::relcore::{Database, Dictionary, Relation, Schema, Value};
use crate::vorder::{JoinTree, VariableOrder};

/// Lunch orders: who ordered which dish on which day, what goes into each
/// dish, and what each item costs. Their join has 12 tuples.
pub fn restaurant() -> Database {
    let mut dict = Dictionary::new();
    let orders = [
        ("Elise", "Monday", "burger"),
        ("Elise", "Friday", "burger"),
        ("Steve", "Friday", "hotdog"),
        ("Joe", "Friday", "hotdog"),
    ];
    let dishes = [
        ("burger", "patty"),
        ("burger", "onion"),
        ("burger", "bun"),
        ("hotdog", "bun"),
        ("hotdog", "onion"),
        ("hotdog", "sausage"),
    ];
    let items = [("patty", 6.0), ("onion", 2.0), ("bun", 2.0), ("sausage", 4.0)];

    let schema = Schema::parse("Orders", &["customer:cat", "day:cat", "dish:cat"]).expect("valid schema");
    let rows: Vec<_> = orders
        .iter()
        .map(|(c, d, x)| vec![dict.intern("customer", c), dict.intern("day", d), dict.intern("dish", x)])
        .collect();
    let orders = Relation::from_rows(schema, rows).expect("rows match schema");

    let schema = Schema::parse("Dish", &["dish:cat", "item:cat"]).expect("valid schema");
    let rows: Vec<_> = dishes
        .iter()
        .map(|(d, i)| vec![dict.intern("dish", d), dict.intern("item", i)])
        .collect();
    let dish = Relation::from_rows(schema, rows).expect("rows match schema");

    let schema = Schema::parse("Items", &["item:cat", "price:num"]).expect("valid schema");
    let rows: Vec<_> = items
        .iter()
        .map(|(i, p)| vec![dict.intern("item", i), Value::num(*p)])
        .collect();
    let items = Relation::from_rows(schema, rows).expect("rows match schema");

    Database::new(vec![orders, dish, items], dict).expect("distinct relation names")
}

/// `dish(day(customer), item(price))`: days and customers depend only on the
/// dish, and prices only on the item, so price subtrees are shared.
pub fn restaurant_order() -> VariableOrder {
    VariableOrder::parse("dish(day(customer), item(price))").expect("valid order")
}

pub fn restaurant_join_tree() -> JoinTree {
    JoinTree::new(
        vec!["Orders".into(), "Dish".into(), "Items".into()],
        &[("Orders", "Dish"), ("Dish", "Items")],
    )
    .expect("acyclic")
}

/// Shape of a generated star schema: a fact table `Sales(k1..kD, m1..mM, y)`
/// and dimensions `Di(ki, xi, zi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarConfig {
    pub facts: usize,
    pub dimensions: usize,
    /// Rows per key in every dimension, so the join has
    /// `facts * fanout^dimensions` tuples.
    pub fanout: usize,
    /// Distinct key values per dimension.
    pub keys: usize,
    pub measures: usize,
    pub seed: u64,
}

impl Default for StarConfig {
    fn default() -> Self {
        StarConfig {
            facts: 1000,
            dimensions: 2,
            fanout: 4,
            keys: 50,
            measures: 2,
            seed: 7,
        }
    }
}

impl StarConfig {
    pub fn join_size(&self) -> usize {
        self.facts * self.fanout.pow(self.dimensions as u32)
    }
}

/// A generated star schema with a matching join tree, variable order and
/// feature list.
#[derive(Clone, Debug)]
pub struct Star {
    pub db: Database,
    pub join_tree: JoinTree,
    pub order: VariableOrder,
    /// Numeric non-key attributes; the response `y` is last.
    pub features: Vec<String>,
}

impl Star {
    pub fn response(&self) -> &str {
        self.features.last().expect("response present")
    }
}

/// Generates a star schema. Values are small integers so sums stay exact in
/// floating point; `y` depends linearly on the measures plus noise.
pub fn star(config: &StarConfig) -> Result<Star> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let d = config.dimensions;
    let keys = config.keys.max(1);
    let mut fact_attrs: Vec<String> = (1..=d).map(|i| format!("k{i}:num")).collect();
    fact_attrs.extend((1..=config.measures).map(|i| format!("m{i}:num")));
    fact_attrs.push("y:num".into());
    let specs: Vec<&str> = fact_attrs.iter().map(String::as_str).collect();
    let mut sales = Relation::new(Schema::parse("Sales", &specs)?);
    for _ in 0..config.facts {
        let mut t: Vec<Value> = (0..d).map(|_| Value::num(rng.gen_range(0..keys) as f64)).collect();
        let mut y = rng.gen_range(-2..=2) as f64;
        for j in 0..config.measures {
            let m = rng.gen_range(0..10) as f64;
            y += (j as f64 + 1.0) * m;
            t.push(Value::num(m));
        }
        t.push(Value::num(y));
        sales.insert(t, 1)?;
    }

    let mut relations = vec![sales];
    let mut features: Vec<String> = Vec::new();
    let mut order_text = String::new();
    for i in 1..=d {
        let schema = Schema::parse(format!("D{i}"), &[&format!("k{i}:num"), &format!("x{i}:num"), &format!("z{i}:num")])?;
        let mut dim = Relation::new(schema);
        for k in 0..keys {
            for f in 0..config.fanout {
                let x = rng.gen_range(0..20) as f64;
                let z = (f as f64) + rng.gen_range(0..5) as f64 * 10.0;
                dim.insert(vec![Value::num(k as f64), Value::num(x), Value::num(z)], 1)?;
            }
        }
        relations.push(dim);
        features.push(format!("x{i}"));
        features.push(format!("z{i}"));
        order_text.push_str(&format!("k{i}(x{i}(z{i}), "));
    }
    features.extend((1..=config.measures).map(|i| format!("m{i}")));
    features.push("y".into());
    let mut chain = String::new();
    for m in (1..=config.measures).map(|i| format!("m{i}")).chain(["y".to_string()]) {
        chain.push_str(&m);
        chain.push('(');
    }
    chain.truncate(chain.len() - 1);
    chain.push_str(&")".repeat(config.measures));
    order_text.push_str(&chain);
    order_text.push_str(&")".repeat(d));

    let names: Vec<String> = relations.iter().map(|r| r.name().to_string()).collect();
    let edges: Vec<(String, String)> = (1..=d).map(|i| ("Sales".to_string(), format!("D{i}"))).collect();
    let edge_refs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let join_tree = JoinTree::new(names, &edge_refs)?;
    let order = VariableOrder::parse(&order_text)?;
    let db = Database::new(relations, Dictionary::new())?;
    Ok(Star {
        db,
        join_tree,
        order,
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_shape() {
        let cfg = StarConfig {
            facts: 20,
            dimensions: 2,
            fanout: 3,
            keys: 4,
            measures: 1,
            seed: 1,
        };
        let s = star(&cfg).unwrap();
        assert_eq!(s.order.to_string(), "k1(x1(z1), k2(x2(z2), m1(y)))");
        assert!(s.order.validate(&s.db.schemas()).is_empty());
        assert_eq!(s.db.relation("D1").unwrap().len(), 12);
        assert_eq!(s.features, ["x1", "z1", "x2", "z2", "m1", "y"]);
        assert_eq!(star(&cfg).unwrap().db.relations(), s.db.relations());
    }

    #[test]
    fn restaurant_shape() {
        let db = restaurant();
        assert_eq!(db.relations().iter().map(Relation::len).sum::<usize>(), 14);
        assert!(restaurant_order().validate(&db.schemas()).is_empty());
    }
}

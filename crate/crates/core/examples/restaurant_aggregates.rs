//! Counts, sums, group-by sums and filtered sums over the join of the
//! restaurant database, all computed in a single traversal.

use factorml::evaluator::{eval_batch, eval_filtered, AggResult};
use factorml::synth::{restaurant, restaurant_order};
use factorml::vorder::AggregateSpec;

fn main() -> factorml::Result<()> {
    let db = restaurant();
    let order = restaurant_order();
    let batch: Vec<AggregateSpec> = ["SUM(1)", "SUM(price)", "SUM(price) GROUP BY dish", "SUM(1) GROUP BY day, customer"]
        .iter()
        .map(|s| AggregateSpec::parse(s))
        .collect::<factorml::Result<_>>()?;

    let results = eval_batch::<f64>(&db, &order, &batch)?;
    for (spec, r) in batch.iter().zip(&results) {
        match r {
            AggResult::Scalar(v) => println!("{spec} = {v}"),
            AggResult::Grouped(m) => {
                println!("{spec}:");
                for (key, v) in m.iter() {
                    let group: Vec<String> = key
                        .iter()
                        .map(|(a, val)| db.dict().display(db.catalog().name(*a), val))
                        .collect();
                    println!("  {} -> {v}", group.join(", "));
                }
            }
        }
    }

    let expensive = AggregateSpec::parse("SUM(1) WHERE price >= 4")?;
    let r = eval_filtered::<f64>(&db, &order, &expensive)?;
    println!("{expensive} = {}", r.scalar().unwrap());
    Ok(())
}

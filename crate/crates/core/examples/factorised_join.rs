//! Builds the factorised join of the restaurant database and compares its
//! size with the flat join.

use factorml::frep::{build_frep, BuildOptions};
use factorml::synth::{restaurant, restaurant_order};

fn main() -> factorml::Result<()> {
    let db = restaurant();
    let order = restaurant_order();
    let f = build_frep(&db, &order, BuildOptions::default())?;
    print!("{}", f.outline(db.dict()));

    let tuples = f.enumerate();
    let arity = f.columns().len();
    println!();
    println!("columns: {}", f.columns().join(", "));
    println!("join tuples: {}", tuples.len());
    println!("values, flat join: {}", tuples.len() * arity);
    println!("values, factorised: {}", f.count_values());

    let tree = build_frep(&db, &order, BuildOptions { cache: false })?;
    println!("values, factorised without sharing: {}", tree.count_values());
    Ok(())
}

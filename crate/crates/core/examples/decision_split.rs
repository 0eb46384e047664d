//! Scores candidate decision-tree splits by the variance of the response on
//! each side, computed from filtered aggregates over the join.

use factorml::mlkit::{best_split, SplitCandidate};
use factorml::synth::{restaurant, restaurant_order};

fn main() -> factorml::Result<()> {
    let db = restaurant();
    let candidates = vec![
        SplitCandidate::is_in("dish", &["burger"]),
        SplitCandidate::is_in("item", &["patty"]),
        SplitCandidate::is_in("item", &["patty", "sausage"]),
        SplitCandidate::is_in("day", &["Friday"]),
    ];
    let choice = best_split::<f64>(&db, &restaurant_order(), "price", &candidates)?;
    for (c, cost) in candidates.iter().zip(&choice.costs) {
        println!("{:<32} cost {cost:.3}", c.to_string());
    }
    println!("best: {} (cost {:.3})", choice.candidate, choice.cost);
    Ok(())
}

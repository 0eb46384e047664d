//! Keeps a covariance batch up to date under random inserts and deletes and
//! checks the maintained views against recomputation.

use std::time::Instant;

use factorml::ivm::{init_state, Delta};
use factorml::mlkit::{covariance_batch, CovarianceMatrix};
use factorml::synth::{star, StarConfig};
use factorml::vorder::{decompose_aggregates, DecomposeOptions};
use factorml::Value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> factorml::Result<()> {
    let cfg = StarConfig {
        facts: 2000,
        keys: 100,
        ..StarConfig::default()
    };
    let s = star(&cfg)?;
    let batch = covariance_batch(&s.features);
    let root = s.join_tree.default_root(&s.db);
    let dag = decompose_aggregates(&batch, &s.join_tree, root, &s.db.schemas(), DecomposeOptions::default())?;
    let mut state = init_state::<f64>(s.db.clone(), dag)?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut inserted = Vec::new();
    let start = Instant::now();
    let n = 5000;
    for _ in 0..n {
        let delete = !inserted.is_empty() && rng.gen_bool(0.3);
        let delta = if delete {
            let d: Delta = inserted.swap_remove(rng.gen_range(0..inserted.len()));
            d.negate()
        } else {
            let rel = &state.database().relations()[rng.gen_range(0..state.database().relations().len())];
            let tuple = rel
                .schema()
                .attributes()
                .iter()
                .map(|a| {
                    let max = if a.name.starts_with('k') { cfg.keys } else { 10 };
                    Value::num(rng.gen_range(0..max) as f64)
                })
                .collect();
            let d = Delta::single(rel.schema().clone(), tuple, 1)?;
            inserted.push(d.clone());
            d
        };
        state.apply_delta(&delta)?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("{n} updates in {elapsed:.3} s ({:.0} updates/s)", n as f64 / elapsed);
    println!("views match recomputation: {}", state.verify(1e-9)?);
    let m = CovarianceMatrix::from_batch_results(&s.features, state.results())?;
    println!("join tuples now: {}", m.count());
    Ok(())
}

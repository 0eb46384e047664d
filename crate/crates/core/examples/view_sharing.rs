//! Decomposes a covariance batch over a join tree into shared views and
//! compares relation scans with evaluating each aggregate on its own.

use factorml::evaluator::{eval_per_aggregate, eval_view_dag, EvalOptions};
use factorml::mlkit::covariance_batch;
use factorml::synth::{star, StarConfig};
use factorml::vorder::{decompose_aggregates, DecomposeOptions};

fn main() -> factorml::Result<()> {
    let s = star(&StarConfig {
        facts: 5000,
        ..StarConfig::default()
    })?;
    let batch = covariance_batch(&s.features);
    let root = s.join_tree.default_root(&s.db);
    let schemas = s.db.schemas();

    let merged = decompose_aggregates(&batch, &s.join_tree, root, &schemas, DecomposeOptions::default())?;
    let unmerged = decompose_aggregates(&batch, &s.join_tree, root, &schemas, DecomposeOptions { merge: false })?;
    println!("{} aggregates", batch.len());
    println!("views: {} merged, {} unmerged", merged.len(), unmerged.len());
    for g in &merged.groups {
        println!("  {}: {} views (level {})", merged.tree.relations[g.node], g.views.len(), g.level);
    }

    let shared = eval_view_dag::<f64>(&s.db, &merged, EvalOptions { threads: 2 })?;
    let (alone, stats) = eval_per_aggregate::<f64>(&s.db, &s.join_tree, root, &batch)?;
    assert!(shared.results.iter().zip(&alone).all(|(a, b)| a.close_to(b, 1e-9)));
    println!("scans: {} shared, {} one aggregate at a time", shared.stats.scans, stats.scans);
    println!(
        "time: {:.2} ms shared, {:.2} ms one at a time",
        shared.stats.elapsed.as_secs_f64() * 1e3,
        stats.elapsed.as_secs_f64() * 1e3
    );
    Ok(())
}

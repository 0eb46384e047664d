//! Times the factorised pipeline against materialising, exporting and
//! aggregating the join, on a generated star schema.
//!
//! Run with `--release`; pass the number of facts as the first argument.

use factorml::cli::{run_bench, Workload};
use factorml::mlkit::ModelSpec;
use factorml::synth::{star, StarConfig};

fn main() -> factorml::Result<()> {
    let facts = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let s = star(&StarConfig {
        facts,
        keys: (facts / 20).max(1),
        ..StarConfig::default()
    })?;
    let model = ModelSpec::new(&s.features[..s.features.len() - 1], s.response());
    let w = Workload {
        root: s.join_tree.default_root(&s.db),
        db: s.db,
        join_tree: s.join_tree,
        order: Some(s.order),
        batch: Vec::new(),
        model: Some(model),
    };
    let report = run_bench(&w, 1)?;
    print!("{}", report.table(false));
    println!("covariance matrices agree: {}", report.agree);
    Ok(())
}

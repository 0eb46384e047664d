//! Trains a ridge regression over a star-schema join from its covariance
//! matrix, then refreshes the model after new facts arrive, starting from the
//! previous weights.

use factorml::mlkit::{covariance_matrix, train_linreg, train_linreg_from, ModelSpec};
use factorml::synth::{star, StarConfig};
use factorml::Value;

fn main() -> factorml::Result<()> {
    let s = star(&StarConfig::default())?;
    let features = &s.features[..s.features.len() - 1];
    let spec = ModelSpec {
        standardise: true,
        ..ModelSpec::new(features, s.response())
    };
    let m = covariance_matrix::<f64>(&s.db, &s.order, &s.features)?;
    let model = train_linreg(&m, &spec)?;
    println!("trained on {} join tuples in {} iterations", m.count(), model.iterations);
    println!("  intercept: {:.4}", model.intercept());
    for f in features {
        println!("  {f}: {:.4}", model.weight(f).unwrap());
    }

    let mut db = s.db.clone();
    let mut sales = db.relation("Sales").unwrap().clone();
    for i in 0..200 {
        let m1 = (i % 10) as f64;
        let m2 = (i % 7) as f64;
        let t = vec![Value::num((i % 50) as f64), Value::num((i % 40) as f64), Value::num(m1), Value::num(m2), Value::num(m1 + 2.0 * m2)];
        sales.insert(t, 1)?;
    }
    db.set_relation(sales)?;
    let m = covariance_matrix::<f64>(&db, &s.order, &s.features)?;
    let cold = train_linreg(&m, &spec)?;
    let warm = train_linreg_from(&m, &spec, Some(&model))?;
    println!("after 200 new facts: {} iterations from scratch, {} from the previous model", cold.iterations, warm.iterations);
    Ok(())
}

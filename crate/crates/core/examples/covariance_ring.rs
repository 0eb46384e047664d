//! Folds the burger part of the restaurant join into the covariance ring:
//! one pass yields the count, the sum and the sum of squares of the price.
//! Then computes the full covariance matrix of a generated star schema.

use factorml::evaluator::fold_join;
use factorml::mlkit::covariance_matrix;
use factorml::rings::{lift_numeric, CovarianceRing, LiftMap, Lifted};
use factorml::synth::{restaurant, restaurant_order, star, StarConfig};

fn main() -> factorml::Result<()> {
    let db = restaurant();
    let burger = db.dict().lookup("dish", "burger").expect("burger is a dish");
    let ring = CovarianceRing::<f64>::new(1);
    let lifts = LiftMap::new()
        .with("dish", move |v| if *v == burger { Lifted::One } else { Lifted::Skip })
        .with("price", |v| Lifted::Elem(lift_numeric(1, 0, v.as_f64().unwrap()).unwrap()));
    let t = fold_join(&db, &restaurant_order(), &ring, &lifts)?;
    println!("burger: count {}, sum of prices {}, sum of squared prices {}", t.c, t.s[0], t.q(0, 0));

    let s = star(&StarConfig::default())?;
    let m = covariance_matrix::<f64>(&s.db, &s.order, &s.features)?;
    println!();
    println!("star schema with {} join tuples:", m.count());
    m.write_csv(std::io::stdout())?;
    Ok(())
}

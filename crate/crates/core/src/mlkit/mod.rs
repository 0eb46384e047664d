//! Learning from aggregates: ridge regression over the covariance matrix of
//! the join, and decision-tree split scoring from filtered count, sum and
//! sum-of-squares aggregates.

mod covariance;
mod linreg;
mod split;

pub use covariance::{covariance_batch, covariance_matrix, CovarianceMatrix};
pub use linreg::{gradient, train_linreg, train_linreg_from, LinearModel, ModelSpec};
pub use split::{best_split, SplitCandidate, SplitChoice, SplitCondition};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::{Database, Dictionary, Relation, Schema, Value};
    use crate::synth::{restaurant, restaurant_order};
    use crate::vorder::VariableOrder;

    fn xy(rows: &[(f64, f64)]) -> (Database, VariableOrder) {
        let schema = Schema::parse("R", &["x:num", "y:num"]).unwrap();
        let rel = Relation::from_rows(schema, rows.iter().map(|&(x, y)| vec![Value::num(x), Value::num(y)])).unwrap();
        (Database::new(vec![rel], Dictionary::new()).unwrap(), VariableOrder::parse("x(y)").unwrap())
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn restaurant_price_moments() {
        let m = covariance_matrix::<f64>(&restaurant(), &restaurant_order(), &names(&["price"])).unwrap();
        assert_eq!(*m.get(0, 0), 12.0);
        assert_eq!(*m.get(0, 1), 36.0);
        assert_eq!(m.get(1, 0), m.get(0, 1));
    }

    #[test]
    fn single_tuple_matrix() {
        let (db, vo) = xy(&[(3.0, 5.0)]);
        let m = covariance_matrix::<f64>(&db, &vo, &names(&["x"])).unwrap();
        assert_eq!(m.rows(), &[vec![1.0, 3.0], vec![3.0, 9.0]]);
    }

    #[test]
    fn learns_a_line() {
        let (db, vo) = xy(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0), (4.0, 8.0)]);
        let m = covariance_matrix::<f64>(&db, &vo, &names(&["x", "y"])).unwrap();
        let model = train_linreg(&m, &ModelSpec::new(&["x"], "y")).unwrap();
        assert!(model.converged);
        assert!(model.intercept().abs() < 1e-6);
        assert!((model.weight("x").unwrap() - 2.0).abs() < 1e-6);

        let std = ModelSpec {
            standardise: true,
            ..ModelSpec::new(&["x"], "y")
        };
        let s = train_linreg(&m, &std).unwrap();
        assert!((s.weight("x").unwrap() - 2.0).abs() < 1e-6);
        assert!(s.iterations < model.iterations);

        let warm = train_linreg_from(&m, &ModelSpec::new(&["x"], "y"), Some(&model)).unwrap();
        assert!(warm.iterations < model.iterations);

        let mut buf = Vec::new();
        model.write(&mut buf).unwrap();
        assert_eq!(LinearModel::read(buf.as_slice()).unwrap(), model);
    }

    #[test]
    fn heavy_ridge_shrinks_to_zero() {
        let (db, vo) = xy(&[(1.0, 2.0), (2.0, 4.0), (3.0, 7.0)]);
        let m = covariance_matrix::<f64>(&db, &vo, &names(&["x", "y"])).unwrap();
        let model = train_linreg(&m, &ModelSpec::new(&["x"], "y").with_lambda(1e9)).unwrap();
        let fy = (m.get(0, 2).powi(2) + m.get(1, 2).powi(2)).sqrt();
        let norm = model.theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        assert!(norm <= 1e-6 * fy);
    }

    #[test]
    fn zero_matrix_stops_at_once() {
        let m = CovarianceMatrix::<f64>::zero(&names(&["x", "y"]));
        let model = train_linreg(&m, &ModelSpec::new(&["x"], "y").with_lambda(1.0)).unwrap();
        assert_eq!(model.iterations, 1);
        assert_eq!(model.theta, vec![0.0, 0.0]);
    }

    #[test]
    fn divergence_is_reported() {
        let (db, vo) = xy(&[(1.0, 2.0), (2.0, 4.0)]);
        let m = covariance_matrix::<f64>(&db, &vo, &names(&["x", "y"])).unwrap();
        let spec = ModelSpec {
            alpha: Some(10.0),
            ..ModelSpec::new(&["x"], "y")
        };
        assert!(matches!(train_linreg(&m, &spec), Err(crate::Error::Diverged { .. })));
    }

    #[test]
    fn split_on_a_step() {
        let rows: Vec<(f64, f64)> = (0..10).map(|x| (x as f64, if x >= 5 { 1.0 } else { 0.0 })).collect();
        let (db, vo) = xy(&rows);
        let cands: Vec<_> = [3.0, 5.0, 7.0].iter().map(|&c| SplitCandidate::at_least("x", c)).collect();
        let best = best_split::<f64>(&db, &vo, "y", &cands).unwrap();
        assert_eq!(best.index, 1);
        assert_eq!(best.cost, 0.0);
    }

    #[test]
    fn constant_response_takes_the_first_candidate() {
        let rows: Vec<(f64, f64)> = (0..6).map(|x| (x as f64, 3.0)).collect();
        let (db, vo) = xy(&rows);
        let cands: Vec<_> = [4.0, 2.0, 9.0].iter().map(|&c| SplitCandidate::at_least("x", c)).collect();
        let best = best_split::<f64>(&db, &vo, "y", &cands).unwrap();
        assert!(best.costs.iter().all(|&c| c == 0.0));
        assert_eq!(best.candidate, SplitCandidate::at_least("x", 2.0));
    }

    #[test]
    fn categorical_split() {
        let db = restaurant();
        let cands = vec![
            SplitCandidate::is_in("item", &["patty"]),
            SplitCandidate::is_in("dish", &["burger"]),
        ];
        let best = best_split::<f64>(&db, &restaurant_order(), "price", &cands).unwrap();
        // patty is the only price-6 item: left {6,6}, right ten prices of 2 or 4
        assert_eq!(best.index, 0);
        assert!(matches!(
            best_split::<f64>(&db, &restaurant_order(), "price", &[SplitCandidate::at_least("dish", 1.0)]),
            Err(crate::Error::Type(_))
        ));
    }
}

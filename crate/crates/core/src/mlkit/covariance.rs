use std::io::Write;

use crate::error::{Error, Result};
use crate::evaluator::{fold_join, AggResult};
use crate::relcore::{AttrKind, Database};
use crate::rings::{lift_numeric, CovarianceRing, LiftMap, Lifted};
use crate::scalar::Scalar;
use crate::vorder::{AggregateSpec, VariableOrder};

/// `SUM(xᵢ·xⱼ)` over the join for an intercept (index 0, constant 1) and
/// the attributes `attrs` (indices 1..=n).
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix<S> {
    attrs: Vec<String>,
    data: Vec<Vec<S>>,
}

impl<S: Scalar> CovarianceMatrix<S> {
    pub fn zero(attrs: &[String]) -> Self {
        let n = attrs.len() + 1;
        CovarianceMatrix {
            attrs: attrs.to_vec(),
            data: vec![vec![S::zero(); n]; n],
        }
    }

    /// Builds the matrix from a full symmetric array; row and column 0 are
    /// the intercept.
    pub fn from_rows(attrs: &[String], data: Vec<Vec<S>>) -> Result<Self> {
        let n = attrs.len() + 1;
        if data.len() != n || data.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: data.len(),
            });
        }
        Ok(CovarianceMatrix {
            attrs: attrs.to_vec(),
            data,
        })
    }

    /// Assembles the matrix from results of [`covariance_batch`]`(attrs)`.
    pub fn from_batch_results(attrs: &[String], results: &[AggResult<S>]) -> Result<Self> {
        let n = attrs.len();
        let expected = 1 + n + n * (n + 1) / 2;
        if results.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: results.len(),
            });
        }
        let mut m = Self::zero(attrs);
        let mut it = results.iter().map(|r| r.scalar().cloned().unwrap_or_else(S::zero));
        m.data[0][0] = it.next().expect("length checked");
        for i in 1..=n {
            let v = it.next().expect("length checked");
            m.data[0][i] = v.clone();
            m.data[i][0] = v;
        }
        for i in 1..=n {
            for j in i..=n {
                let v = it.next().expect("length checked");
                m.data[i][j] = v.clone();
                m.data[j][i] = v;
            }
        }
        Ok(m)
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    /// Side length, `attrs.len() + 1`.
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i][j]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.data
    }

    /// Row/column of `attr`; the intercept is 0.
    pub fn index_of(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a == attr).map(|i| i + 1)
    }

    /// Number of join tuples.
    pub fn count(&self) -> &S {
        &self.data[0][0]
    }

    pub fn to_f64(&self) -> CovarianceMatrix<f64> {
        CovarianceMatrix {
            attrs: self.attrs.clone(),
            data: self.data.iter().map(|r| r.iter().map(Scalar::as_f64).collect()).collect(),
        }
    }

    /// CSV with a header row and one labelled row per attribute.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::io("<matrix>", std::io::Error::other(e));
        let labels: Vec<&str> = std::iter::once("intercept").chain(self.attrs.iter().map(String::as_str)).collect();
        let mut header = vec![""];
        header.extend(&labels);
        w.write_record(&header).map_err(io)?;
        for (label, row) in labels.iter().zip(&self.data) {
            let mut rec = vec![label.to_string()];
            rec.extend(row.iter().map(crate::evaluator::fmt_scalar));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("<matrix>", e))
    }
}

/// The aggregates behind a covariance matrix, in the order
/// [`CovarianceMatrix::from_batch_results`] reads them: `SUM(1)`, every
/// `SUM(xᵢ)`, then `SUM(xᵢ * xⱼ)` for `i ≤ j`.
pub fn covariance_batch(attrs: &[String]) -> Vec<AggregateSpec> {
    let mut batch = vec![AggregateSpec::count()];
    batch.extend(attrs.iter().map(|a| AggregateSpec::sum(&[a])));
    for (i, a) in attrs.iter().enumerate() {
        for b in &attrs[i..] {
            batch.push(AggregateSpec::sum(&[a, b]));
        }
    }
    batch
}

/// Computes the covariance matrix of `attrs` in one fold of the covariance
/// ring along `vo`.
pub fn covariance_matrix<S: Scalar>(db: &Database, vo: &VariableOrder, attrs: &[String]) -> Result<CovarianceMatrix<S>> {
    for (i, a) in attrs.iter().enumerate() {
        let id = db.catalog().require(a)?;
        if db.catalog().kind(id) != AttrKind::Numeric {
            return Err(Error::Type(format!("covariance attribute `{a}` must be numeric")));
        }
        if attrs[..i].contains(a) {
            return Err(Error::Config(format!("attribute `{a}` listed twice")));
        }
    }
    let n = attrs.len();
    let ring = CovarianceRing::<S>::new(n);
    let mut lifts = LiftMap::new();
    for (i, a) in attrs.iter().enumerate() {
        lifts.set(a, move |v| {
            Lifted::Elem(lift_numeric(n, i, v.as_f64().expect("numeric attribute")).expect("index within n"))
        });
    }
    let t = fold_join(db, vo, &ring, &lifts)?;
    let mut m = CovarianceMatrix::zero(attrs);
    m.data[0][0] = t.c.clone();
    for i in 0..n {
        m.data[0][i + 1] = t.s[i].clone();
        m.data[i + 1][0] = t.s[i].clone();
        for j in 0..n {
            m.data[i + 1][j + 1] = t.q(i, j).clone();
        }
    }
    Ok(m)
}

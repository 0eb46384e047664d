//! Numeric scalars used by the rings.
//!
//! Data values are stored as 64-bit floats. Aggregation runs either in `f64`
//! (the default) or in exact arbitrary-precision rationals, which every finite
//! float converts into without loss. The rational mode is what the oracle
//! tests compare against.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

pub type Rational = num_rational::BigRational;

pub trait Scalar:
    Num + Clone + Debug + PartialOrd + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn from_value(v: f64) -> Self {
        Self::from_f64(v).expect("finite value")
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits")
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn negated(&self) -> Self {
        Self::zero() - self.clone()
    }

    /// Exact equality when `rel_tol` is zero, otherwise relative closeness
    /// measured in `f64` with an absolute floor of `rel_tol` near zero.
    fn close_to(&self, other: &Self, rel_tol: f64) -> bool {
        if self == other {
            return true;
        }
        if rel_tol == 0.0 {
            return false;
        }
        let (a, b) = (self.as_f64(), other.as_f64());
        let scale = a.abs().max(b.abs()).max(1.0);
        (a - b).abs() <= rel_tol * scale
    }
}

impl<T> Scalar for T where
    T: Num + Clone + Debug + PartialOrd + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

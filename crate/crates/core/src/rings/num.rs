use std::marker::PhantomData;

use super::Ring;
use crate::scalar::Scalar;

/// Plain numbers: `SUM(1)` when every value lifts to one, `SUM(x)` when the
/// values of `x` are kept.
#[derive(Clone, Copy, Debug, Default)]
pub struct NumRing<S>(PhantomData<S>);

impl<S> NumRing<S> {
    pub fn new() -> Self {
        NumRing(PhantomData)
    }
}

impl<S: Scalar> Ring for NumRing<S> {
    type Elem = S;

    fn zero(&self) -> S {
        S::zero()
    }

    fn one(&self) -> S {
        S::one()
    }

    fn plus(&self, a: &S, b: &S) -> S {
        a.clone() + b.clone()
    }

    fn times(&self, a: &S, b: &S) -> S {
        a.clone() * b.clone()
    }

    fn neg(&self, a: &S) -> S {
        a.negated()
    }

    fn is_zero(&self, a: &S) -> bool {
        a.is_zero()
    }

    fn scale(&self, a: &S, k: i64) -> S {
        a.clone() * S::from_int(k)
    }
}

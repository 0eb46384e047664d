//! The sum-product abstraction.
//!
//! A factorised join becomes a ring expression once unions map to `+`,
//! products to `*`, and each value to a ring element through a lift
//! function. Changing the ring changes what is computed: counts and sums in
//! [`NumRing`], the whole covariance batch at once in [`CovarianceRing`],
//! group-by aggregates as sparse maps in [`GroupByRing`].

mod counting;
mod covariance;
mod fold;
mod groupby;
mod lift;
mod num;
mod product;

use std::fmt::Debug;

pub use counting::{CountingRing, OpCounts};
pub use covariance::{cov_plus, cov_times, lift_numeric, CovarianceRing, CovarianceTriple};
pub use fold::{ring_fold, ring_fold_counted};
pub use groupby::{GroupByMap, GroupByRing, GroupKey};
pub use lift::{LiftMap, Lifted};
pub use num::NumRing;
pub use product::ProductRing;

/// A commutative ring `(D, +, *, 0, 1)` with additive inverses.
///
/// Implementations are value-level descriptions (e.g. the dimension of a
/// covariance triple); elements are plain values.
pub trait Ring {
    type Elem: Clone + Debug + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn times(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn plus_assign(&self, acc: &mut Self::Elem, b: &Self::Elem) {
        *acc = self.plus(acc, b);
    }

    /// `a` added to itself `k` times (negative `k` negates); used for tuple
    /// multiplicities.
    fn scale(&self, a: &Self::Elem, k: i64) -> Self::Elem;
}

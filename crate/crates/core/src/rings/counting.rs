use std::sync::atomic::{AtomicU64, Ordering};

use super::Ring;

/// Number of ring operations performed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub plus: u64,
    pub times: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.plus + self.times
    }
}

/// Wraps a ring and counts additions and multiplications.
#[derive(Debug, Default)]
pub struct CountingRing<R> {
    pub inner: R,
    plus: AtomicU64,
    times: AtomicU64,
}

impl<R> CountingRing<R> {
    pub fn new(inner: R) -> Self {
        CountingRing {
            inner,
            plus: AtomicU64::new(0),
            times: AtomicU64::new(0),
        }
    }

    pub fn counts(&self) -> OpCounts {
        OpCounts {
            plus: self.plus.load(Ordering::Relaxed),
            times: self.times.load(Ordering::Relaxed),
        }
    }
}

impl<R: Ring> Ring for CountingRing<R> {
    type Elem = R::Elem;

    fn zero(&self) -> Self::Elem {
        self.inner.zero()
    }

    fn one(&self) -> Self::Elem {
        self.inner.one()
    }

    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.plus.fetch_add(1, Ordering::Relaxed);
        self.inner.plus(a, b)
    }

    fn plus_assign(&self, acc: &mut Self::Elem, b: &Self::Elem) {
        self.plus.fetch_add(1, Ordering::Relaxed);
        self.inner.plus_assign(acc, b)
    }

    fn times(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.times.fetch_add(1, Ordering::Relaxed);
        self.inner.times(a, b)
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.inner.neg(a)
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.inner.is_zero(a)
    }

    fn scale(&self, a: &Self::Elem, k: i64) -> Self::Elem {
        if k != 1 {
            self.times.fetch_add(1, Ordering::Relaxed);
        }
        self.inner.scale(a, k)
    }
}

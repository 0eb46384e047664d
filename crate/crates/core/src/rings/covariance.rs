use std::marker::PhantomData;

use super::Ring;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `(c, s, Q)`: a count, the vector of feature sums, and the symmetric matrix
/// of feature co-moments, over `n` features. `Q` is stored as its lower
/// triangle in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceTriple<S> {
    pub c: S,
    pub s: Vec<S>,
    q: Vec<S>,
}

fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl<S: Scalar> CovarianceTriple<S> {
    pub fn zero(n: usize) -> Self {
        CovarianceTriple {
            c: S::zero(),
            s: vec![S::zero(); n],
            q: vec![S::zero(); n * (n + 1) / 2],
        }
    }

    pub fn one(n: usize) -> Self {
        CovarianceTriple {
            c: S::one(),
            ..Self::zero(n)
        }
    }

    /// Builds a triple from a count, sums, and a full (symmetric) matrix;
    /// only the lower triangle of `q` is read.
    pub fn from_parts(c: S, s: Vec<S>, q: &[Vec<S>]) -> Self {
        let n = s.len();
        let mut t = CovarianceTriple {
            c,
            s,
            q: Vec::with_capacity(n * (n + 1) / 2),
        };
        for (i, row) in q.iter().enumerate().take(n) {
            t.q.extend(row[..=i].iter().cloned());
        }
        t
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn q(&self, i: usize, j: usize) -> &S {
        &self.q[tri(i, j)]
    }

    pub fn q_dense(&self) -> Vec<Vec<S>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.q(i, j).clone()).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero() && self.s.iter().all(S::is_zero) && self.q.iter().all(S::is_zero)
    }

    fn add_into(&mut self, b: &Self) {
        self.c = self.c.clone() + b.c.clone();
        for (x, y) in self.s.iter_mut().zip(&b.s) {
            *x = x.clone() + y.clone();
        }
        for (x, y) in self.q.iter_mut().zip(&b.q) {
            *x = x.clone() + y.clone();
        }
    }

    fn mul(&self, b: &Self) -> Self {
        let n = self.n();
        let (c1, c2) = (&self.c, &b.c);
        let s = self
            .s
            .iter()
            .zip(&b.s)
            .map(|(s1, s2)| c2.clone() * s1.clone() + c1.clone() * s2.clone())
            .collect();
        let mut q = Vec::with_capacity(self.q.len());
        for i in 0..n {
            for j in 0..=i {
                let k = tri(i, j);
                q.push(
                    c2.clone() * self.q[k].clone()
                        + c1.clone() * b.q[k].clone()
                        + self.s[i].clone() * b.s[j].clone()
                        + b.s[i].clone() * self.s[j].clone(),
                );
            }
        }
        CovarianceTriple {
            c: c1.clone() * c2.clone(),
            s,
            q,
        }
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        CovarianceTriple {
            c: f(&self.c),
            s: self.s.iter().map(&f).collect(),
            q: self.q.iter().map(&f).collect(),
        }
    }
}

fn same_dim<S: Scalar>(a: &CovarianceTriple<S>, b: &CovarianceTriple<S>) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::Dimension {
            expected: a.n(),
            got: b.n(),
        });
    }
    Ok(())
}

/// Componentwise sum.
pub fn cov_plus<S: Scalar>(
    a: &CovarianceTriple<S>,
    b: &CovarianceTriple<S>,
) -> Result<CovarianceTriple<S>> {
    same_dim(a, b)?;
    let mut out = a.clone();
    out.add_into(b);
    Ok(out)
}

/// `(c1 c2, c2 s1 + c1 s2, c2 Q1 + c1 Q2 + s1 s2ᵀ + s2 s1ᵀ)`.
pub fn cov_times<S: Scalar>(
    a: &CovarianceTriple<S>,
    b: &CovarianceTriple<S>,
) -> Result<CovarianceTriple<S>> {
    same_dim(a, b)?;
    Ok(a.mul(b))
}

/// Lift of value `v` of feature `i`: `(1, v eᵢ, v² Eᵢᵢ)`. The squared
/// diagonal entry is what makes `Qᵢᵢ` come out as the sum of squares, since a
/// product never multiplies a feature's value with itself.
pub fn lift_numeric<S: Scalar>(n: usize, i: usize, v: f64) -> Result<CovarianceTriple<S>> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let x = S::from_value(v);
    let mut t = CovarianceTriple::one(n);
    t.q[tri(i, i)] = x.clone() * x.clone();
    t.s[i] = x;
    Ok(t)
}

/// The ring of covariance triples over `n` features.
#[derive(Clone, Copy, Debug)]
pub struct CovarianceRing<S> {
    pub n: usize,
    _scalar: PhantomData<S>,
}

impl<S> CovarianceRing<S> {
    pub fn new(n: usize) -> Self {
        CovarianceRing {
            n,
            _scalar: PhantomData,
        }
    }
}

impl<S: Scalar> Ring for CovarianceRing<S> {
    type Elem = CovarianceTriple<S>;

    fn zero(&self) -> Self::Elem {
        CovarianceTriple::zero(self.n)
    }

    fn one(&self) -> Self::Elem {
        CovarianceTriple::one(self.n)
    }

    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        debug_assert_eq!(a.n(), b.n());
        let mut out = a.clone();
        out.add_into(b);
        out
    }

    fn plus_assign(&self, acc: &mut Self::Elem, b: &Self::Elem) {
        acc.add_into(b);
    }

    fn times(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        debug_assert_eq!(a.n(), b.n());
        a.mul(b)
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.map(|x| x.negated())
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }

    fn scale(&self, a: &Self::Elem, k: i64) -> Self::Elem {
        if k == 1 {
            return a.clone();
        }
        let k = S::from_int(k);
        a.map(|x| x.clone() * k.clone())
    }
}

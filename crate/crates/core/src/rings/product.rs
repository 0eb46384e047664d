use super::Ring;

/// Componentwise product of rings of one type, e.g. one group-by ring per
/// aggregate of a batch so a single pass computes all of them.
#[derive(Clone, Debug)]
pub struct ProductRing<R> {
    pub parts: Vec<R>,
}

impl<R> ProductRing<R> {
    pub fn new(parts: Vec<R>) -> Self {
        ProductRing { parts }
    }

    pub fn width(&self) -> usize {
        self.parts.len()
    }
}

impl<R: Ring> Ring for ProductRing<R> {
    type Elem = Vec<R::Elem>;

    fn zero(&self) -> Self::Elem {
        self.parts.iter().map(Ring::zero).collect()
    }

    fn one(&self) -> Self::Elem {
        self.parts.iter().map(Ring::one).collect()
    }

    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.parts
            .iter()
            .zip(a.iter().zip(b))
            .map(|(r, (x, y))| r.plus(x, y))
            .collect()
    }

    fn plus_assign(&self, acc: &mut Self::Elem, b: &Self::Elem) {
        for (r, (x, y)) in self.parts.iter().zip(acc.iter_mut().zip(b)) {
            r.plus_assign(x, y);
        }
    }

    fn times(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.parts
            .iter()
            .zip(a.iter().zip(b))
            .map(|(r, (x, y))| r.times(x, y))
            .collect()
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.parts.iter().zip(a).map(|(r, x)| r.neg(x)).collect()
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.parts.iter().zip(a).all(|(r, x)| r.is_zero(x))
    }

    fn scale(&self, a: &Self::Elem, k: i64) -> Self::Elem {
        self.parts.iter().zip(a).map(|(r, x)| r.scale(x, k)).collect()
    }
}

use std::marker::PhantomData;

use smallvec::{smallvec, SmallVec};

use super::Ring;
use crate::relcore::{AttrId, Value};
use crate::scalar::Scalar;

/// A group-by key: attribute/value pairs sorted by attribute.
pub type GroupKey = SmallVec<[(AttrId, Value); 2]>;

/// Sparse map from group keys to scalars.
///
/// Entries are kept sorted by key with no zero values, so structural
/// equality is ring equality. Multiplying two maps joins their keys: keys that
/// bind the same attribute to different values do not combine.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupByMap<S> {
    entries: SmallVec<[(GroupKey, S); 1]>,
}

impl<S: Scalar> Default for GroupByMap<S> {
    fn default() -> Self {
        Self::zero()
    }
}

fn merge_keys(a: &GroupKey, b: &GroupKey) -> Option<GroupKey> {
    if a.is_empty() {
        return Some(b.clone());
    }
    if b.is_empty() {
        return Some(a.clone());
    }
    let mut out = GroupKey::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (x, y) = (&a[i], &b[j]);
        match x.0.cmp(&y.0) {
            std::cmp::Ordering::Less => {
                out.push(*x);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(*y);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                if x.1 != y.1 {
                    return None;
                }
                out.push(*x);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some(out)
}

impl<S: Scalar> GroupByMap<S> {
    pub fn zero() -> Self {
        GroupByMap {
            entries: SmallVec::new(),
        }
    }

    pub fn one() -> Self {
        Self::scalar(S::one())
    }

    /// The map holding `value` under the empty key.
    pub fn scalar(value: S) -> Self {
        Self::singleton(GroupKey::new(), value)
    }

    pub fn singleton(mut key: GroupKey, value: S) -> Self {
        if value.is_zero() {
            return Self::zero();
        }
        key.sort_by_key(|&(a, _)| a);
        GroupByMap {
            entries: smallvec![(key, value)],
        }
    }

    /// Builds a map from arbitrary pairs, summing duplicates.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (GroupKey, S)>) -> Self {
        let mut entries: Vec<(GroupKey, S)> = pairs
            .into_iter()
            .map(|(mut k, v)| {
                k.sort_by_key(|&(a, _)| a);
                (k, v)
            })
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: SmallVec<[(GroupKey, S); 1]> = SmallVec::new();
        for (k, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == k => last.1 = last.1.clone() + v,
                _ => out.push((k, v)),
            }
        }
        out.retain(|e| !e.1.is_zero());
        GroupByMap { entries: out }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupKey, &S)> {
        self.entries.iter().map(|(k, v)| (k, v))
    }

    pub fn get(&self, key: &[(AttrId, Value)]) -> Option<&S> {
        self.entries
            .binary_search_by(|e| e.0.as_slice().cmp(key))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    /// Value under the empty key, zero if absent.
    pub fn scalar_value(&self) -> S {
        self.get(&[]).cloned().unwrap_or_else(S::zero)
    }

    /// Sum over all groups.
    pub fn total(&self) -> S {
        self.entries
            .iter()
            .fold(S::zero(), |acc, (_, v)| acc + v.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let (a, b) = (&self.entries, &other.entries);
        let mut out: SmallVec<[(GroupKey, S); 1]> = SmallVec::with_capacity(a.len().max(b.len()));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let v = a[i].1.clone() + b[j].1.clone();
                    if !v.is_zero() {
                        out.push((a[i].0.clone(), v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        GroupByMap { entries: out }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::zero();
        }
        if self.entries.len() == 1 && other.entries.len() == 1 {
            let (ka, va) = &self.entries[0];
            let (kb, vb) = &other.entries[0];
            return match merge_keys(ka, kb) {
                Some(k) => Self::singleton(k, va.clone() * vb.clone()),
                None => Self::zero(),
            };
        }
        let mut pairs = Vec::with_capacity(self.len() * other.len());
        for (ka, va) in &self.entries {
            for (kb, vb) in &other.entries {
                if let Some(k) = merge_keys(ka, kb) {
                    pairs.push((k, va.clone() * vb.clone()));
                }
            }
        }
        Self::from_pairs(pairs)
    }

    pub fn map_values(&self, f: impl Fn(&S) -> S) -> Self {
        let mut entries: SmallVec<[(GroupKey, S); 1]> =
            self.entries.iter().map(|(k, v)| (k.clone(), f(v))).collect();
        entries.retain(|e| !e.1.is_zero());
        GroupByMap { entries }
    }

    /// True if every value is within `rel_tol` of the other map's value for
    /// the same key (missing keys count as zero).
    pub fn close_to(&self, other: &Self, rel_tol: f64) -> bool {
        let diff = self.add(&other.map_values(|v| v.negated()));
        let ok = diff.iter().all(|(k, _)| {
            let a = self.get(k).cloned().unwrap_or_else(S::zero);
            let b = other.get(k).cloned().unwrap_or_else(S::zero);
            a.close_to(&b, rel_tol)
        });
        ok
    }
}

/// Ring of [`GroupByMap`]s.
#[derive(Clone, Copy, Debug, Default)]
pub struct GroupByRing<S>(PhantomData<S>);

impl<S> GroupByRing<S> {
    pub fn new() -> Self {
        GroupByRing(PhantomData)
    }
}

impl<S: Scalar> Ring for GroupByRing<S> {
    type Elem = GroupByMap<S>;

    fn zero(&self) -> Self::Elem {
        GroupByMap::zero()
    }

    fn one(&self) -> Self::Elem {
        GroupByMap::one()
    }

    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b)
    }

    fn times(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.mul(b)
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.map_values(|v| v.negated())
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_empty()
    }

    fn scale(&self, a: &Self::Elem, k: i64) -> Self::Elem {
        if k == 1 {
            return a.clone();
        }
        let k = S::from_int(k);
        a.map_values(|v| v.clone() * k.clone())
    }
}

use std::collections::btree_map::{self, BTreeMap};

use super::schema::{AttrKind, Schema};
use super::value::Value;
use crate::error::{Error, Result};

pub type Tuple = Vec<Value>;

/// A bag of tuples: each distinct tuple maps to a non-zero signed
/// multiplicity. Entries are kept sorted so scans are deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    schema: Schema,
    entries: BTreeMap<Tuple, i64>,
}

impl Relation {
    pub fn new(schema: Schema) -> Self {
        Relation {
            schema,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a relation from rows, each counted once.
    pub fn from_rows(schema: Schema, rows: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let mut r = Relation::new(schema);
        for row in rows {
            r.insert(row, 1)?;
        }
        Ok(r)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn name(&self) -> &str {
        self.schema.name()
    }

    /// Number of distinct tuples.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of multiplicities.
    pub fn total_multiplicity(&self) -> i64 {
        self.entries.values().sum()
    }

    pub fn multiplicity(&self, tuple: &[Value]) -> i64 {
        self.entries.get(tuple).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Tuple, i64> {
        self.entries.iter()
    }

    pub fn check_tuple(&self, tuple: &[Value]) -> Result<()> {
        if tuple.len() != self.schema.arity() {
            return Err(Error::SchemaMismatch(format!(
                "tuple of arity {} for relation `{}` of arity {}",
                tuple.len(),
                self.name(),
                self.schema.arity()
            )));
        }
        for (v, a) in tuple.iter().zip(self.schema.attributes()) {
            let ok = match a.kind {
                AttrKind::Numeric => matches!(v, Value::Num(x) if x.is_finite()),
                AttrKind::Categorical => matches!(v, Value::Cat(_)),
            };
            if !ok {
                return Err(Error::Type(format!(
                    "value {v} does not fit {} attribute `{}` of `{}`",
                    a.kind,
                    a.name,
                    self.name()
                )));
            }
        }
        Ok(())
    }

    /// Adds `multiplicity` copies of `tuple`; the entry disappears when its
    /// multiplicity reaches zero.
    pub fn insert(&mut self, tuple: Tuple, multiplicity: i64) -> Result<()> {
        self.check_tuple(&tuple)?;
        self.insert_unchecked(tuple, multiplicity);
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, tuple: Tuple, multiplicity: i64) {
        if multiplicity == 0 {
            return;
        }
        match self.entries.entry(tuple) {
            btree_map::Entry::Vacant(e) => {
                e.insert(multiplicity);
            }
            btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += multiplicity;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    /// Pointwise sum of multiplicities. Both relations must share a schema.
    pub fn add(&self, other: &Relation) -> Result<Relation> {
        if self.schema != other.schema {
            return Err(Error::SchemaMismatch(format!(
                "cannot add `{}` and `{}`",
                self.name(),
                other.name()
            )));
        }
        let mut out = self.clone();
        for (t, &m) in &other.entries {
            out.insert_unchecked(t.clone(), m);
        }
        Ok(out)
    }

    /// The relation with every multiplicity negated.
    pub fn negate(&self) -> Relation {
        Relation {
            schema: self.schema.clone(),
            entries: self.entries.iter().map(|(t, m)| (t.clone(), -m)).collect(),
        }
    }

    /// Keeps the tuples satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&[Value]) -> bool) -> Relation {
        Relation {
            schema: self.schema.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, m)| (t.clone(), *m))
                .collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Relation {
    type Item = (&'a Tuple, &'a i64);
    type IntoIter = btree_map::Iter<'a, Tuple, i64>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

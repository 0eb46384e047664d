use crate::error::Result;
use crate::relcore::{Relation, Schema, Tuple};

/// Signed change to one relation: positive multiplicities insert, negative
/// ones delete.
#[derive(Clone, Debug, PartialEq)]
pub struct Delta {
    change: Relation,
}

impl Delta {
    /// An empty change to the relation with `schema`.
    pub fn new(schema: Schema) -> Self {
        Delta {
            change: Relation::new(schema),
        }
    }

    pub fn single(schema: Schema, tuple: Tuple, multiplicity: i64) -> Result<Self> {
        let mut d = Delta::new(schema);
        d.add(tuple, multiplicity)?;
        Ok(d)
    }

    pub fn from_relation(change: Relation) -> Self {
        Delta { change }
    }

    /// Accumulates `multiplicity` for `tuple`; opposite changes cancel.
    pub fn add(&mut self, tuple: Tuple, multiplicity: i64) -> Result<()> {
        self.change.insert(tuple, multiplicity)
    }

    pub fn relation_name(&self) -> &str {
        self.change.name()
    }

    pub fn schema(&self) -> &Schema {
        self.change.schema()
    }

    pub fn len(&self) -> usize {
        self.change.len()
    }

    pub fn is_empty(&self) -> bool {
        self.change.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, i64)> {
        self.change.iter().map(|(t, &m)| (t, m))
    }

    pub fn negate(&self) -> Delta {
        Delta {
            change: self.change.negate(),
        }
    }

    pub fn as_relation(&self) -> &Relation {
        &self.change
    }
}

use std::collections::HashMap;

use super::relation::Relation;
use super::schema::AttrKind;
use super::value::Dictionary;
use crate::error::{Error, Result};

/// Dense id of an attribute name within a [`Catalog`].
pub type AttrId = usize;

/// The distinct attribute names of a database in first-declaration order,
/// with their kinds. Attributes join by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    names: Vec<String>,
    kinds: Vec<AttrKind>,
    index: HashMap<String, AttrId>,
}

impl Catalog {
    pub fn from_relations<'a>(relations: impl IntoIterator<Item = &'a Relation>) -> Result<Self> {
        let mut c = Catalog::default();
        for r in relations {
            for a in r.schema().attributes() {
                match c.index.get(&a.name) {
                    Some(&id) if c.kinds[id] != a.kind => {
                        return Err(Error::Schema(format!(
                            "attribute `{}` is {} in `{}` but {} elsewhere",
                            a.name,
                            a.kind,
                            r.name(),
                            c.kinds[id]
                        )))
                    }
                    Some(_) => {}
                    None => {
                        c.index.insert(a.name.clone(), c.names.len());
                        c.names.push(a.name.clone());
                        c.kinds.push(a.kind);
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<AttrId> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<AttrId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn name(&self, id: AttrId) -> &str {
        &self.names[id]
    }

    pub fn kind(&self, id: AttrId) -> AttrKind {
        self.kinds[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// A set of uniquely named relations sharing one categorical dictionary.
#[derive(Clone, Debug)]
pub struct Database {
    relations: Vec<Relation>,
    dict: Dictionary,
    catalog: Catalog,
}

impl Database {
    pub fn new(relations: Vec<Relation>, dict: Dictionary) -> Result<Self> {
        for (i, r) in relations.iter().enumerate() {
            if relations[..i].iter().any(|o| o.name() == r.name()) {
                return Err(Error::Schema(format!("duplicate relation `{}`", r.name())));
            }
        }
        let catalog = Catalog::from_relations(&relations)?;
        Ok(Database {
            relations,
            dict,
            catalog,
        })
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name() == name)
    }

    pub fn relation_index(&self, name: &str) -> Result<usize> {
        self.relations
            .iter()
            .position(|r| r.name() == name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    /// Replaces the contents of a relation; the schema must not change.
    pub fn set_relation(&mut self, relation: Relation) -> Result<()> {
        let i = self.relation_index(relation.name())?;
        if self.relations[i].schema() != relation.schema() {
            return Err(Error::SchemaMismatch(format!(
                "new contents of `{}` have a different schema",
                relation.name()
            )));
        }
        self.relations[i] = relation;
        Ok(())
    }

    pub(crate) fn relation_mut(&mut self, index: usize) -> &mut Relation {
        &mut self.relations[index]
    }

    pub fn dict(&self) -> &Dictionary {
        &self.dict
    }

    pub fn dict_mut(&mut self) -> &mut Dictionary {
        &mut self.dict
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn schemas(&self) -> Vec<&super::Schema> {
        self.relations.iter().map(Relation::schema).collect()
    }
}

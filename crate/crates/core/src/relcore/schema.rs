use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Numeric,
    Categorical,
}

impl FromStr for AttrKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "num" | "numeric" | "number" => Ok(AttrKind::Numeric),
            "cat" | "categorical" | "category" => Ok(AttrKind::Categorical),
            other => Err(Error::Schema(format!("unknown attribute kind `{other}`"))),
        }
    }
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttrKind::Numeric => "numeric",
            AttrKind::Categorical => "categorical",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
}

impl Attribute {
    pub fn new(name: impl Into<String>, kind: AttrKind) -> Self {
        Attribute {
            name: name.into(),
            kind,
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self::new(name, AttrKind::Numeric)
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self::new(name, AttrKind::Categorical)
    }
}

/// Named, ordered list of attributes. Names are unique and non-empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Schema {
    name: String,
    attributes: Vec<Attribute>,
}

impl Schema {
    pub fn new(name: impl Into<String>, attributes: Vec<Attribute>) -> Result<Self> {
        let name = name.into();
        if attributes.is_empty() {
            return Err(Error::Schema(format!("relation `{name}` has no attributes")));
        }
        let mut seen = HashSet::new();
        for a in &attributes {
            if a.name.is_empty() {
                return Err(Error::Schema(format!("relation `{name}` has an unnamed attribute")));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Schema(format!(
                    "attribute `{}` repeated in relation `{name}`",
                    a.name
                )));
            }
        }
        Ok(Schema { name, attributes })
    }

    /// Parses `"name:kind"` specs, e.g. `["dish:cat", "price:num"]`.
    pub fn parse(name: impl Into<String>, specs: &[&str]) -> Result<Self> {
        let attributes = specs
            .iter()
            .map(|s| {
                let (n, k) = s
                    .split_once(':')
                    .ok_or_else(|| Error::Schema(format!("expected `name:kind`, got `{s}`")))?;
                Ok(Attribute::new(n.trim(), k.trim().parse()?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, attributes)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn index_of(&self, attr: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == attr)
    }

    pub fn contains(&self, attr: &str) -> bool {
        self.index_of(attr).is_some()
    }

    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }
}

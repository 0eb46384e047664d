use std::collections::HashMap;

use crate::relcore::Value;

/// Result of lifting one attribute value into a ring.
#[derive(Clone, Debug, PartialEq)]
pub enum Lifted<E> {
    /// The multiplicative identity: the attribute does not contribute.
    One,
    /// The value is filtered out; its branch contributes zero.
    Skip,
    Elem(E),
}

type LiftFn<'a, E> = Box<dyn Fn(&Value) -> Lifted<E> + Send + Sync + 'a>;

/// Per-attribute lift functions, keyed by attribute name. Attributes without
/// an entry lift to one.
pub struct LiftMap<'a, E> {
    lifts: HashMap<String, LiftFn<'a, E>>,
}

impl<E> Default for LiftMap<'_, E> {
    fn default() -> Self {
        LiftMap {
            lifts: HashMap::new(),
        }
    }
}

impl<'a, E> LiftMap<'a, E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(
        mut self,
        attr: &str,
        f: impl Fn(&Value) -> Lifted<E> + Send + Sync + 'a,
    ) -> Self {
        self.set(attr, f);
        self
    }

    pub fn set(&mut self, attr: &str, f: impl Fn(&Value) -> Lifted<E> + Send + Sync + 'a) {
        self.lifts.insert(attr.to_string(), Box::new(f));
    }

    pub fn get(&self, attr: &str) -> Option<&(dyn Fn(&Value) -> Lifted<E> + Send + Sync + 'a)> {
        self.lifts.get(attr).map(|b| b.as_ref())
    }

    pub fn lift(&self, attr: &str, v: &Value) -> Lifted<E> {
        match self.lifts.get(attr) {
            Some(f) => f(v),
            None => Lifted::One,
        }
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.lifts.keys().map(String::as_str)
    }
}

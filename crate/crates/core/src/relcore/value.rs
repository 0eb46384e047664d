use std::collections::HashMap;
use std::fmt;

use ordered_float::OrderedFloat;

/// A single attribute value.
///
/// Numeric values are finite floats; categorical values are ids interned per
/// attribute in a [`Dictionary`]. The derived order sorts numbers by value and
/// categories by id (first-seen order), which is the iteration order used
/// everywhere a deterministic order over values is needed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Num(OrderedFloat<f64>),
    Cat(u32),
}

impl Value {
    pub fn num(v: f64) -> Value {
        debug_assert!(v.is_finite(), "numeric values must be finite");
        // -0.0 and 0.0 must hash and compare alike.
        Value::Num(OrderedFloat(if v == 0.0 { 0.0 } else { v }))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(v.0),
            Value::Cat(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Num(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{}", v.0),
            Value::Cat(id) => write!(f, "#{id}"),
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

/// Per-attribute interning of categorical strings to dense ids.
///
/// Attributes with the same name share an interner, so a category joins
/// across relations.
#[derive(Clone, Debug, Default)]
pub struct Dictionary {
    attrs: HashMap<String, Interner>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, attr: &str, text: &str) -> Value {
        let interner = self.attrs.entry(attr.to_string()).or_default();
        if let Some(&id) = interner.ids.get(text) {
            return Value::Cat(id);
        }
        let id = interner.names.len() as u32;
        interner.names.push(text.to_string());
        interner.ids.insert(text.to_string(), id);
        Value::Cat(id)
    }

    pub fn lookup(&self, attr: &str, text: &str) -> Option<Value> {
        self.attrs
            .get(attr)
            .and_then(|i| i.ids.get(text))
            .map(|&id| Value::Cat(id))
    }

    pub fn resolve(&self, attr: &str, id: u32) -> Option<&str> {
        self.attrs
            .get(attr)
            .and_then(|i| i.names.get(id as usize))
            .map(String::as_str)
    }

    /// Number of distinct categories seen so far for `attr`.
    pub fn cardinality(&self, attr: &str) -> usize {
        self.attrs.get(attr).map_or(0, |i| i.names.len())
    }

    /// Renders a value the way it appeared in the input.
    pub fn display(&self, attr: &str, value: &Value) -> String {
        match value {
            Value::Num(v) => format_number(v.0),
            Value::Cat(id) => self
                .resolve(attr, *id)
                .map(str::to_string)
                .unwrap_or_else(|| format!("#{id}")),
        }
    }
}

/// Shortest round-tripping text for a float; integral values print without a
/// fractional part.
pub(crate) fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

use std::fmt;

use crate::error::{Error, Result};
use crate::relcore::{AttrId, AttrKind, Catalog, Dictionary, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    In,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::In => "in",
        }
    }
}

/// A literal as written; it is interpreted against the attribute's kind when
/// the filter is bound.
pub type Literal = String;

/// Single-attribute predicate `attr op constant` or `attr in (v1, ..., vk)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Filter {
    pub attr: String,
    pub op: CmpOp,
    pub values: Vec<Literal>,
}

impl Filter {
    pub fn cmp(attr: impl Into<String>, op: CmpOp, value: f64) -> Self {
        Filter {
            attr: attr.into(),
            op,
            values: vec![crate::relcore::format_number(value)],
        }
    }

    pub fn equals(attr: impl Into<String>, value: impl Into<String>) -> Self {
        Filter {
            attr: attr.into(),
            op: CmpOp::Eq,
            values: vec![value.into()],
        }
    }

    pub fn is_in<S: AsRef<str>>(attr: impl Into<String>, values: &[S]) -> Self {
        Filter {
            attr: attr.into(),
            op: CmpOp::In,
            values: values.iter().map(|v| v.as_ref().to_string()).collect(),
        }
    }

    /// Parses `price >= 4`, `dish = burger`, `dish in (burger, hotdog)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Config(format!("cannot parse filter `{text}`"));
        let lower = text.to_ascii_lowercase();
        if let Some(pos) = lower.find(" in ") {
            let attr = text[..pos].trim();
            let rest = text[pos + 4..].trim();
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(bad)?;
            let values: Vec<String> = inner
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if attr.is_empty() || values.is_empty() {
                return Err(bad());
            }
            return Ok(Filter {
                attr: attr.to_string(),
                op: CmpOp::In,
                values,
            });
        }
        for (sym, op) in [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("≤", CmpOp::Le),
            ("≥", CmpOp::Ge),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
            ("=", CmpOp::Eq),
        ] {
            if let Some((a, v)) = text.split_once(sym) {
                let (a, v) = (a.trim(), v.trim());
                if a.is_empty() || v.is_empty() {
                    return Err(bad());
                }
                return Ok(Filter {
                    attr: a.to_string(),
                    op,
                    values: vec![v.to_string()],
                });
            }
        }
        Err(bad())
    }

    pub fn bind(&self, catalog: &Catalog, dict: &Dictionary) -> Result<BoundFilter> {
        let attr = catalog.require(&self.attr)?;
        if self.op != CmpOp::In && self.values.len() != 1 {
            return Err(Error::Type(format!("filter on `{}` needs one constant", self.attr)));
        }
        let pred = match catalog.kind(attr) {
            AttrKind::Numeric => {
                let nums = self
                    .values
                    .iter()
                    .map(|v| {
                        v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                            Error::Type(format!("`{v}` is not a number for `{}`", self.attr))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                match self.op {
                    CmpOp::In => Predicate::NumIn(nums),
                    op => Predicate::Cmp(op, nums[0]),
                }
            }
            AttrKind::Categorical => match self.op {
                CmpOp::Eq | CmpOp::In => {
                    // unseen categories match nothing
                    let mut ids: Vec<u32> = self
                        .values
                        .iter()
                        .filter_map(|v| match dict.lookup(&self.attr, v) {
                            Some(Value::Cat(id)) => Some(id),
                            _ => None,
                        })
                        .collect();
                    ids.sort_unstable();
                    ids.dedup();
                    Predicate::CatIn(ids)
                }
                op => {
                    return Err(Error::Type(format!(
                        "operator `{}` does not apply to categorical `{}`",
                        op.symbol(),
                        self.attr
                    )))
                }
            },
        };
        Ok(BoundFilter { attr, pred })
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            CmpOp::In => write!(f, "{} in ({})", self.attr, self.values.join(", ")),
            op => write!(f, "{} {} {}", self.attr, op.symbol(), self.values[0]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Predicate {
    Cmp(CmpOp, f64),
    NumIn(Vec<f64>),
    CatIn(Vec<u32>),
}

/// A filter resolved against a catalog and dictionary.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundFilter {
    pub attr: AttrId,
    pub(crate) pred: Predicate,
}

impl BoundFilter {
    pub fn admits(&self, v: &Value) -> bool {
        match (&self.pred, v) {
            (Predicate::Cmp(op, c), Value::Num(x)) => {
                let x = x.0;
                match op {
                    CmpOp::Lt => x < *c,
                    CmpOp::Le => x <= *c,
                    CmpOp::Eq => x == *c,
                    CmpOp::Ge => x >= *c,
                    CmpOp::Gt => x > *c,
                    CmpOp::In => unreachable!("`in` binds to a set predicate"),
                }
            }
            (Predicate::NumIn(set), Value::Num(x)) => set.contains(&x.0),
            (Predicate::CatIn(ids), Value::Cat(id)) => ids.binary_search(id).is_ok(),
            _ => false,
        }
    }
}

/// `SUM(product of attributes) [GROUP BY ...] [WHERE filter]`.
///
/// An empty product is `SUM(1)`. Product attributes form a multiset, so
/// `SUM(x * x)` lists `x` twice.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AggregateSpec {
    pub product: Vec<String>,
    pub group_by: Vec<String>,
    pub filter: Option<Filter>,
}

impl AggregateSpec {
    pub fn count() -> Self {
        Self::default()
    }

    pub fn sum<S: AsRef<str>>(attrs: &[S]) -> Self {
        AggregateSpec {
            product: attrs.iter().map(|a| a.as_ref().to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn grouped_by<S: AsRef<str>>(mut self, attrs: &[S]) -> Self {
        self.group_by = attrs.iter().map(|a| a.as_ref().to_string()).collect();
        self
    }

    pub fn filtered(mut self, filter: Filter) -> Self {
        self.filter = Some(filter);
        self
    }

    /// Parses `SUM(price) GROUP BY dish WHERE price >= 4`; `SUM(1)` counts.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("cannot parse aggregate `{text}`: {m}"));
        let t = text.trim();
        let lower = t.to_ascii_lowercase();
        if !lower.starts_with("sum") {
            return Err(bad("expected SUM(...)"));
        }
        let open = t.find('(').ok_or_else(|| bad("missing `(`"))?;
        let close = t.find(')').ok_or_else(|| bad("missing `)`"))?;
        if close < open {
            return Err(bad("unbalanced parentheses"));
        }
        let inner = t[open + 1..close].trim();
        let product: Vec<String> = if inner == "1" || inner.is_empty() {
            Vec::new()
        } else {
            inner.split('*').map(|a| a.trim().to_string()).collect()
        };
        if product.iter().any(|a| a.is_empty() || a == "1") {
            return Err(bad("malformed product"));
        }
        let rest = &t[close + 1..];
        let rest_lower = rest.to_ascii_lowercase();
        let where_pos = rest_lower.find("where");
        let group_pos = rest_lower.find("group by");
        let mut spec = AggregateSpec {
            product,
            ..Self::default()
        };
        if let Some(g) = group_pos {
            let end = where_pos.filter(|&w| w > g).unwrap_or(rest.len());
            spec.group_by = rest[g + 8..end]
                .split(',')
                .map(|a| a.trim().to_string())
                .filter(|a| !a.is_empty())
                .collect();
            if spec.group_by.is_empty() {
                return Err(bad("empty GROUP BY"));
            }
        }
        if let Some(w) = where_pos {
            let end = group_pos.filter(|&g| g > w).unwrap_or(rest.len());
            spec.filter = Some(Filter::parse(&rest[w + 5..end])?);
        }
        let leftover = match (group_pos, where_pos) {
            (Some(g), Some(w)) => &rest[..g.min(w)],
            (Some(p), None) | (None, Some(p)) => &rest[..p],
            (None, None) => rest,
        };
        if !leftover.trim().is_empty() {
            return Err(bad("unexpected text after SUM(...)"));
        }
        Ok(spec)
    }

    /// Every attribute the spec refers to.
    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.product
            .iter()
            .chain(&self.group_by)
            .map(String::as_str)
            .chain(self.filter.iter().map(|f| f.attr.as_str()))
    }

    /// Resolves names and checks kinds: products are numeric, group-by
    /// attributes categorical.
    pub fn bind(&self, catalog: &Catalog, dict: &Dictionary) -> Result<BoundSpec> {
        let mut product = Vec::with_capacity(self.product.len());
        for a in &self.product {
            let id = catalog.require(a)?;
            if catalog.kind(id) != AttrKind::Numeric {
                return Err(Error::Type(format!("cannot multiply categorical attribute `{a}`")));
            }
            product.push(id);
        }
        let mut group_by = Vec::with_capacity(self.group_by.len());
        for a in &self.group_by {
            let id = catalog.require(a)?;
            if catalog.kind(id) != AttrKind::Categorical {
                return Err(Error::Type(format!("group-by attribute `{a}` must be categorical")));
            }
            group_by.push(id);
        }
        group_by.sort_unstable();
        group_by.dedup();
        let filter = self.filter.as_ref().map(|f| f.bind(catalog, dict)).transpose()?;
        Ok(BoundSpec {
            product,
            group_by,
            filter,
        })
    }
}

impl fmt::Display for AggregateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.product.is_empty() {
            f.write_str("SUM(1)")?;
        } else {
            write!(f, "SUM({})", self.product.join(" * "))?;
        }
        if !self.group_by.is_empty() {
            write!(f, " GROUP BY {}", self.group_by.join(", "))?;
        }
        if let Some(flt) = &self.filter {
            write!(f, " WHERE {flt}")?;
        }
        Ok(())
    }
}

/// An [`AggregateSpec`] with attribute names resolved to catalog ids.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundSpec {
    pub product: Vec<AttrId>,
    /// Sorted, without duplicates.
    pub group_by: Vec<AttrId>,
    pub filter: Option<BoundFilter>,
}

impl BoundSpec {
    /// Exponent of `attr` in the product.
    pub fn power(&self, attr: AttrId) -> usize {
        self.product.iter().filter(|&&a| a == attr).count()
    }

    pub fn groups_by(&self, attr: AttrId) -> bool {
        self.group_by.binary_search(&attr).is_ok()
    }

    pub fn filter_on(&self, attr: AttrId) -> Option<&BoundFilter> {
        self.filter.as_ref().filter(|f| f.attr == attr)
    }

    pub fn mentions(&self, attr: AttrId) -> bool {
        self.power(attr) > 0 || self.groups_by(attr) || self.filter_on(attr).is_some()
    }
}

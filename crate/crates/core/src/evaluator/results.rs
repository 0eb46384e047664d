use std::io::Write;

use crate::error::{Error, Result};
use crate::relcore::{Catalog, Dictionary};
use crate::rings::{GroupByMap, GroupKey};
use crate::scalar::Scalar;
use crate::vorder::AggregateSpec;

/// Value of one aggregate: a number, or a map from groups to numbers for
/// aggregates with `GROUP BY`.
#[derive(Clone, Debug, PartialEq)]
pub enum AggResult<S> {
    Scalar(S),
    Grouped(GroupByMap<S>),
}

impl<S: Scalar> AggResult<S> {
    pub(crate) fn from_map(spec: &AggregateSpec, map: GroupByMap<S>) -> Self {
        if spec.group_by.is_empty() {
            AggResult::Scalar(map.scalar_value())
        } else {
            AggResult::Grouped(map)
        }
    }

    pub fn scalar(&self) -> Option<&S> {
        match self {
            AggResult::Scalar(s) => Some(s),
            AggResult::Grouped(_) => None,
        }
    }

    pub fn grouped(&self) -> Option<&GroupByMap<S>> {
        match self {
            AggResult::Grouped(m) => Some(m),
            AggResult::Scalar(_) => None,
        }
    }

    /// Both shapes as a map; a scalar sits under the empty key.
    pub fn to_map(&self) -> GroupByMap<S> {
        match self {
            AggResult::Scalar(s) => GroupByMap::scalar(s.clone()),
            AggResult::Grouped(m) => m.clone(),
        }
    }

    pub fn close_to(&self, other: &Self, rel_tol: f64) -> bool {
        match (self, other) {
            (AggResult::Scalar(a), AggResult::Scalar(b)) => a.close_to(b, rel_tol),
            (AggResult::Grouped(a), AggResult::Grouped(b)) => a.close_to(b, rel_tol),
            _ => false,
        }
    }
}

fn group_label(key: &GroupKey, catalog: &Catalog, dict: &Dictionary) -> String {
    key.iter()
        .map(|(a, v)| {
            let name = catalog.name(*a);
            format!("{name}={}", dict.display(name, v))
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Writes `aggregate,group,value` rows, one per scalar or group.
pub fn write_results<S: Scalar, W: Write>(
    out: W,
    batch: &[AggregateSpec],
    results: &[AggResult<S>],
    catalog: &Catalog,
    dict: &Dictionary,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("<results>", std::io::Error::other(e));
    w.write_record(["aggregate", "group", "value"]).map_err(io)?;
    for (spec, r) in batch.iter().zip(results) {
        let name = spec.to_string();
        match r {
            AggResult::Scalar(s) => {
                w.write_record([name.as_str(), "", &fmt_scalar(s)]).map_err(io)?;
            }
            AggResult::Grouped(m) => {
                for (k, v) in m.iter() {
                    let label = group_label(k, catalog, dict);
                    w.write_record([name.as_str(), &label, &fmt_scalar(v)]).map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io("<results>", e))?;
    Ok(())
}

pub(crate) fn fmt_scalar<S: Scalar>(s: &S) -> String {
    let v = s.as_f64();
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

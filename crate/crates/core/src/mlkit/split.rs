use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::evaluator::{eval_batch, eval_filtered};
use crate::relcore::{AttrKind, Database};
use crate::scalar::Scalar;
use crate::vorder::{AggregateSpec, CmpOp, Filter, VariableOrder};

/// Which tuples go to the left side of a split.
#[derive(Clone, Debug, PartialEq)]
pub enum SplitCondition {
    /// `attr >= c`, for numeric attributes.
    AtLeast(f64),
    /// `attr in (v1, ..., vk)`, for categorical attributes.
    In(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitCandidate {
    pub attr: String,
    pub condition: SplitCondition,
}

impl SplitCandidate {
    pub fn at_least(attr: &str, threshold: f64) -> Self {
        SplitCandidate {
            attr: attr.to_string(),
            condition: SplitCondition::AtLeast(threshold),
        }
    }

    pub fn is_in<S: AsRef<str>>(attr: &str, values: &[S]) -> Self {
        let mut values: Vec<String> = values.iter().map(|v| v.as_ref().to_string()).collect();
        values.sort();
        values.dedup();
        SplitCandidate {
            attr: attr.to_string(),
            condition: SplitCondition::In(values),
        }
    }

    pub fn filter(&self) -> Filter {
        match &self.condition {
            SplitCondition::AtLeast(c) => Filter::cmp(&self.attr, CmpOp::Ge, *c),
            SplitCondition::In(vs) => Filter::is_in(&self.attr, vs),
        }
    }
}

impl fmt::Display for SplitCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.filter().fmt(f)
    }
}

/// The winning candidate and the cost of every candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitChoice<S> {
    pub index: usize,
    pub candidate: SplitCandidate,
    pub cost: S,
    pub costs: Vec<S>,
}

/// `Σy² − (Σy)²/n`: the count times the variance; zero for an empty side.
fn side_cost<S: Scalar>(n: &S, sum: &S, sq: &S) -> S {
    if n.is_zero() {
        S::zero()
    } else {
        sq.clone() - sum.clone() * sum.clone() / n.clone()
    }
}

fn condition_order(a: &SplitCondition, b: &SplitCondition) -> Ordering {
    match (a, b) {
        (SplitCondition::AtLeast(x), SplitCondition::AtLeast(y)) => x.total_cmp(y),
        (SplitCondition::In(x), SplitCondition::In(y)) => x.len().cmp(&y.len()).then_with(|| x.cmp(y)),
        (SplitCondition::AtLeast(_), SplitCondition::In(_)) => Ordering::Less,
        (SplitCondition::In(_), SplitCondition::AtLeast(_)) => Ordering::Greater,
    }
}

/// Scores every candidate by the summed within-side squared error of
/// `response` and returns the smallest. Left-side statistics come from
/// filtered aggregates, the right side is the total minus the left.
///
/// Ties go to the attribute declared first in the database, then the
/// smaller threshold or smaller (then lexicographically smaller) category
/// set, then the earlier candidate.
pub fn best_split<S: Scalar>(
    db: &Database,
    vo: &VariableOrder,
    response: &str,
    candidates: &[SplitCandidate],
) -> Result<SplitChoice<S>> {
    if candidates.is_empty() {
        return Err(Error::Config("no split candidates".into()));
    }
    let catalog = db.catalog();
    let y = catalog.require(response)?;
    if catalog.kind(y) != AttrKind::Numeric {
        return Err(Error::Type(format!("response `{response}` must be numeric")));
    }
    for c in candidates {
        let id = catalog.require(&c.attr)?;
        let ok = matches!(
            (&c.condition, catalog.kind(id)),
            (SplitCondition::AtLeast(_), AttrKind::Numeric) | (SplitCondition::In(_), AttrKind::Categorical)
        );
        if !ok {
            return Err(Error::Type(format!("split condition `{c}` does not fit the kind of `{}`", c.attr)));
        }
    }
    let stats = [
        AggregateSpec::count(),
        AggregateSpec::sum(&[response]),
        AggregateSpec::sum(&[response, response]),
    ];
    let total: Vec<S> = eval_batch::<S>(db, vo, &stats)?
        .into_iter()
        .map(|r| r.scalar().cloned().expect("ungrouped"))
        .collect();

    let mut costs = Vec::with_capacity(candidates.len());
    for c in candidates {
        let left: Vec<S> = stats
            .iter()
            .map(|s| {
                let r = eval_filtered::<S>(db, vo, &s.clone().filtered(c.filter()))?;
                Ok(r.scalar().cloned().expect("ungrouped"))
            })
            .collect::<Result<_>>()?;
        let right: Vec<S> = total.iter().zip(&left).map(|(t, l)| t.clone() - l.clone()).collect();
        costs.push(side_cost(&left[0], &left[1], &left[2]) + side_cost(&right[0], &right[1], &right[2]));
    }

    let rank = |i: usize| catalog.id(&candidates[i].attr).expect("checked above");
    let best = (0..candidates.len())
        .min_by(|&a, &b| {
            costs[a]
                .partial_cmp(&costs[b])
                .unwrap_or(Ordering::Equal)
                .then_with(|| rank(a).cmp(&rank(b)))
                .then_with(|| condition_order(&candidates[a].condition, &candidates[b].condition))
                .then_with(|| a.cmp(&b))
        })
        .expect("non-empty");
    Ok(SplitChoice {
        index: best,
        candidate: candidates[best].clone(),
        cost: costs[best].clone(),
        costs,
    })
}

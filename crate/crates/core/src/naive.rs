//! The structure-agnostic baseline: materialise the join, then aggregate
//! tuple by tuple.

use std::collections::HashMap;
use std::io::Write;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::evaluator::AggResult;
use crate::relcore::{read_csv, write_csv, CsvOptions, Database, Dictionary, Relation, Schema, Value};
use crate::rings::{GroupByMap, GroupKey};
use crate::scalar::Scalar;
use crate::vorder::AggregateSpec;

/// Natural join of all relations by hash joins in an order that keeps each
/// step connected where possible. The result is a relation named `join`
/// whose attributes appear in first-seen order.
pub fn materialise(db: &Database) -> Result<Relation> {
    let rels = db.relations();
    if rels.is_empty() {
        return Err(Error::Schema("cannot join an empty database".into()));
    }
    let mut done = vec![false; rels.len()];
    done[0] = true;
    let mut attrs: Vec<crate::relcore::Attribute> = rels[0].schema().attributes().to_vec();
    let mut rows: Vec<(Vec<Value>, i64)> = rels[0].iter().map(|(t, &m)| (t.clone(), m)).collect();
    for _ in 1..rels.len() {
        let next = (0..rels.len())
            .filter(|&i| !done[i])
            .max_by_key(|&i| {
                let shared = rels[i].schema().attribute_names().filter(|a| attrs.iter().any(|b| &b.name == a)).count();
                (shared, std::cmp::Reverse(i))
            })
            .expect("a relation remains");
        done[next] = true;
        let s = rels[next].schema();
        let shared: Vec<(usize, usize)> = s
            .attribute_names()
            .enumerate()
            .filter_map(|(j, a)| attrs.iter().position(|b| b.name == a).map(|i| (i, j)))
            .collect();
        let fresh: Vec<usize> = (0..s.arity()).filter(|j| !shared.iter().any(|&(_, k)| k == *j)).collect();
        let mut index: HashMap<SmallVec<[Value; 4]>, Vec<(&[Value], i64)>> = HashMap::new();
        for (t, &m) in rels[next].iter() {
            index.entry(shared.iter().map(|&(_, j)| t[j]).collect()).or_default().push((t, m));
        }
        let mut out = Vec::new();
        for (row, m) in &rows {
            let key: SmallVec<[Value; 4]> = shared.iter().map(|&(i, _)| row[i]).collect();
            if let Some(matches) = index.get(&key) {
                for (t, m2) in matches {
                    let mut r = row.clone();
                    r.extend(fresh.iter().map(|&j| t[j]));
                    out.push((r, m * m2));
                }
            }
        }
        attrs.extend(fresh.iter().map(|&j| s.attributes()[j].clone()));
        rows = out;
    }
    let mut join = Relation::new(Schema::new("join", attrs)?);
    for (t, m) in rows {
        join.insert_unchecked(t, m);
    }
    Ok(join)
}

/// Evaluates `spec` by visiting every tuple of a materialised join.
pub fn aggregate<S: Scalar>(join: &Relation, db: &Database, spec: &AggregateSpec) -> Result<AggResult<S>> {
    let bound = spec.bind(db.catalog(), db.dict())?;
    let pos = |id: usize| -> Result<usize> {
        let name = db.catalog().name(id);
        join.schema().index_of(name).ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    };
    let product: Vec<usize> = bound.product.iter().map(|&a| pos(a)).collect::<Result<_>>()?;
    let groups: Vec<(usize, usize)> = bound.group_by.iter().map(|&a| Ok((a, pos(a)?))).collect::<Result<_>>()?;
    let filter = bound.filter.as_ref().map(|f| Ok::<_, Error>((f, pos(f.attr)?))).transpose()?;
    if groups.is_empty() {
        let mut total = S::zero();
        for (t, &m) in join.iter() {
            if let Some((f, p)) = &filter {
                if !f.admits(&t[*p]) {
                    continue;
                }
            }
            let mut v = S::from_int(m);
            for &p in &product {
                v = v * S::from_value(t[p].as_f64().expect("numeric"));
            }
            total = total + v;
        }
        return Ok(AggResult::Scalar(total));
    }
    let mut pairs = Vec::new();
    for (t, &m) in join.iter() {
        if let Some((f, p)) = &filter {
            if !f.admits(&t[*p]) {
                continue;
            }
        }
        let mut v = S::from_int(m);
        for &p in &product {
            v = v * S::from_value(t[p].as_f64().expect("numeric"));
        }
        let key: GroupKey = groups.iter().map(|&(a, p)| (a, t[p])).collect();
        pairs.push((key, v));
    }
    Ok(AggResult::from_map(spec, GroupByMap::from_pairs(pairs)))
}

/// The export round trip of a materialise-then-learn pipeline: the join is
/// written out as CSV and parsed back before aggregation.
pub fn export_round_trip(join: &Relation, dict: &Dictionary) -> Result<Relation> {
    let mut buf = Vec::new();
    write_csv(join, &mut buf, CsvOptions::default(), dict)?;
    buf.flush().map_err(|e| Error::io("<export>", e))?;
    let mut dict = dict.clone();
    read_csv(buf.as_slice(), "<export>", join.schema().clone(), CsvOptions::default(), &mut dict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::restaurant;

    #[test]
    fn restaurant_join() {
        let db = restaurant();
        let join = materialise(&db).unwrap();
        assert_eq!(join.len(), 12);
        assert_eq!(join.schema().arity(), 5);
        let r = aggregate::<f64>(&join, &db, &AggregateSpec::parse("SUM(price)").unwrap()).unwrap();
        assert_eq!(r, AggResult::Scalar(36.0));
        let back = export_round_trip(&join, db.dict()).unwrap();
        assert_eq!(back, join);
    }
}

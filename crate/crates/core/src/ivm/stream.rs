use std::io::{BufRead, BufReader, Read};

use super::Delta;
use crate::error::{Error, Result};
use crate::relcore::{parse_fields, Database};

/// Reads an update stream: one update per line,
/// `relation,+|-,multiplicity,value1,value2,...`. Blank lines and lines
/// starting with `#` are skipped. Errors carry the 1-based line number.
pub fn read_updates(reader: impl Read, db: &mut Database) -> Result<Vec<Delta>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io("<update stream>", e))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        out.push(parse_update(text, line_no, db)?);
    }
    Ok(out)
}

/// Parses a single update line.
pub fn parse_update(text: &str, line: usize, db: &mut Database) -> Result<Delta> {
    let bad = |message: String| Error::UpdateStream { line, message };
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() < 3 {
        return Err(bad("expected `relation,+|-,multiplicity,values...`".into()));
    }
    let schema = db
        .relation(fields[0])
        .ok_or_else(|| bad(format!("unknown relation `{}`", fields[0])))?
        .schema()
        .clone();
    let sign = match fields[1] {
        "+" => 1,
        "-" => -1,
        other => return Err(bad(format!("expected `+` or `-`, got `{other}`"))),
    };
    let m: i64 = fields[2]
        .parse()
        .ok()
        .filter(|&m: &i64| m > 0)
        .ok_or_else(|| bad(format!("multiplicity must be a positive integer, got `{}`", fields[2])))?;
    let values = &fields[3..];
    if values.len() != schema.arity() {
        return Err(bad(format!(
            "`{}` has {} attributes, got {} values",
            schema.name(),
            schema.arity(),
            values.len()
        )));
    }
    let tuple = parse_fields(values.iter().copied(), &schema, db.dict_mut())
        .map_err(|(col, msg)| bad(format!("value {col}: {msg}")))?;
    Delta::single(schema, tuple, sign * m)
}

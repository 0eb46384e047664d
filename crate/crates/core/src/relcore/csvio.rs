use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::relation::{Relation, Tuple};
use super::schema::{AttrKind, Schema};
use super::value::{format_number, Dictionary, Value};
use crate::error::{Error, Result};

/// CSV dialect. Fields are not quoted in the corpus this targets, but quoted
/// fields are accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            header: true,
        }
    }
}

impl CsvOptions {
    pub fn headerless() -> Self {
        CsvOptions {
            header: false,
            ..Self::default()
        }
    }
}

/// Loads a relation from a CSV file; duplicate rows accumulate multiplicity.
pub fn load_csv(
    path: impl AsRef<Path>,
    schema: Schema,
    options: CsvOptions,
    dict: &mut Dictionary,
) -> Result<Relation> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, &path.display().to_string(), schema, options, dict)
}

/// Like [`load_csv`] over any reader; `source` names the input in errors.
pub fn read_csv(
    reader: impl Read,
    source: &str,
    schema: Schema,
    options: CsvOptions,
    dict: &mut Dictionary,
) -> Result<Relation> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut relation = Relation::new(schema.clone());
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            path: source.to_string(),
            row: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != schema.arity() {
            return Err(Error::Parse {
                path: source.to_string(),
                row,
                column: record.len().min(schema.arity()) + 1,
                message: format!("expected {} fields, found {}", schema.arity(), record.len()),
            });
        }
        let tuple = parse_fields(record.iter(), &schema, dict).map_err(|(column, message)| {
            Error::Parse {
                path: source.to_string(),
                row,
                column,
                message,
            }
        })?;
        relation.insert_unchecked(tuple, 1);
    }
    Ok(relation)
}

/// Parses one row of text fields against `schema`. On failure returns the
/// 1-based column and a message.
pub(crate) fn parse_fields<'a>(
    fields: impl Iterator<Item = &'a str>,
    schema: &Schema,
    dict: &mut Dictionary,
) -> std::result::Result<Tuple, (usize, String)> {
    fields
        .zip(schema.attributes())
        .enumerate()
        .map(|(i, (field, attr))| match attr.kind {
            AttrKind::Numeric => match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Value::num(v)),
                _ => Err((
                    i + 1,
                    format!("`{field}` is not a finite number for `{}`", attr.name),
                )),
            },
            AttrKind::Categorical => Ok(dict.intern(&attr.name, field)),
        })
        .collect()
}

/// Writes each tuple as many times as its multiplicity. Relations with
/// negative multiplicities have no row encoding and are rejected.
pub fn write_csv(
    relation: &Relation,
    writer: impl Write,
    options: CsvOptions,
    dict: &Dictionary,
) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(options.delimiter)
        .from_writer(writer);
    let to_io = |e: csv::Error| Error::io(relation.name(), std::io::Error::other(e));
    let schema = relation.schema();
    if options.header {
        wtr.write_record(schema.attribute_names()).map_err(to_io)?;
    }
    for (tuple, &m) in relation {
        if m < 0 {
            return Err(Error::Type(format!(
                "relation `{}` has a negative multiplicity",
                relation.name()
            )));
        }
        let fields: Vec<String> = tuple
            .iter()
            .zip(schema.attributes())
            .map(|(v, a)| match v {
                Value::Num(x) => format_number(x.0),
                Value::Cat(_) => dict.display(&a.name, v),
            })
            .collect();
        for _ in 0..m {
            wtr.write_record(&fields).map_err(to_io)?;
        }
    }
    wtr.flush().map_err(|e| Error::io(relation.name(), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dish_schema() -> Schema {
        Schema::parse("Dish", &["dish:cat", "item:cat"]).unwrap()
    }

    #[test]
    fn duplicate_rows_accumulate() {
        let mut d = Dictionary::new();
        let r = read_csv(
            "dish,item\nburger,patty\nburger,patty\n".as_bytes(),
            "dish.csv",
            dish_schema(),
            CsvOptions::default(),
            &mut d,
        )
        .unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.total_multiplicity(), 2);
    }

    #[test]
    fn header_only_is_empty() {
        let mut d = Dictionary::new();
        let r = read_csv(
            "dish,item\n".as_bytes(),
            "x",
            dish_schema(),
            CsvOptions::default(),
            &mut d,
        )
        .unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn parse_errors_carry_position() {
        let mut d = Dictionary::new();
        let schema = Schema::parse("Items", &["item:cat", "price:num"]).unwrap();
        let err = read_csv(
            "item,price\npatty,6\nbun,cheap\n".as_bytes(),
            "items.csv",
            schema.clone(),
            CsvOptions::default(),
            &mut d,
        )
        .unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let err = read_csv(
            "patty\n".as_bytes(),
            "items.csv",
            schema,
            CsvOptions::headerless(),
            &mut d,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }));
    }

    #[test]
    fn semicolon_dialect() {
        let mut d = Dictionary::new();
        let schema = Schema::parse("Items", &["item:cat", "price:num"]).unwrap();
        let opts = CsvOptions {
            delimiter: b';',
            header: false,
        };
        let r = read_csv("bun;2\nonion;2.5\n".as_bytes(), "x", schema, opts, &mut d).unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn missing_file_is_io_error() {
        let mut d = Dictionary::new();
        let err = load_csv(
            "/nonexistent/orders.csv",
            dish_schema(),
            CsvOptions::default(),
            &mut d,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}

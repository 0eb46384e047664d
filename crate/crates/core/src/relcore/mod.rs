//! Relations as maps from tuples to signed multiplicities.
//!
//! Inserts and deletes are both additions of a relation with multiplicities
//! `+k` / `-k`; an entry whose multiplicity sums to zero disappears.

mod csvio;
mod database;
mod relation;
mod schema;
mod value;

pub use csvio::{load_csv, read_csv, write_csv, CsvOptions};
pub use database::{AttrId, Catalog, Database};
pub use relation::{Relation, Tuple};
pub use schema::{AttrKind, Attribute, Schema};
pub use value::{Dictionary, Value};
pub(crate) use value::format_number;
pub(crate) use csvio::parse_fields;

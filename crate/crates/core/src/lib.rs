//! Learning over relational joins without materialising them.
//!
//! The crate computes batches of sum-product aggregates (counts, sums,
//! co-moments, group-by sums, filtered variances) directly over the
//! factorised natural join of a database, keeps them up to date under
//! inserts and deletes, and trains models from the resulting sufficient
//! statistics:
//!
//! - [`relcore`]: relations as tuple to signed multiplicity maps, CSV I/O.
//! - [`vorder`]: variable orders, join trees, aggregate specs, view DAGs.
//! - [`frep`]: factorised join representations and their enumeration.
//! - [`rings`]: the ring interface and the count, covariance and group-by rings.
//! - [`evaluator`]: one-pass folds, shared view evaluation, filtered aggregates.
//! - [`ivm`]: incremental maintenance of the view hierarchy.
//! - [`mlkit`]: ridge regression over the covariance matrix, split scoring.
//! - [`cli`]: the `aggregate`, `train`, `stream` and `bench` commands.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod error;
pub mod evaluator;
pub mod frep;
pub mod ivm;
pub mod mlkit;
pub mod naive;
pub mod relcore;
pub mod rings;
pub mod scalar;
pub mod synth;
pub mod vorder;

pub use error::{Error, Result};
pub use relcore::{AttrKind, Attribute, Database, Dictionary, Relation, Schema, Tuple, Value};
pub use scalar::{Rational, Scalar};

//! Aggregate evaluation.
//!
//! Two strategies compute the same numbers. [`eval_batch`] and
//! [`eval_filtered`] fold the join directly along a variable order, one pass
//! for the whole batch and no factorised result kept in memory.
//! [`eval_view_dag`] runs the decomposed view hierarchy bottom-up over a join
//! tree, computing all views of a node in a single scan of its relation.

mod fused;
mod results;
mod views;

pub use fused::{eval_batch, eval_filtered, fold_join, fold_join_counted};
pub use results::{write_results, AggResult};
pub use views::{
    eval_per_aggregate, eval_view_dag, EvalOptions, EvalStats, GroupTiming, ViewEvaluation, ViewKey, ViewTable,
};
pub(crate) use views::{add_table, root_results, CompiledDag};
pub(crate) use results::fmt_scalar;

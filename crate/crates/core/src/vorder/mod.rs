//! Query plans: variable orders, join trees, aggregate specs and the shared
//! view DAG an aggregate batch decomposes into.

mod aggregate;
mod join_tree;
mod variable_order;
mod view_dag;

pub use aggregate::{AggregateSpec, BoundFilter, BoundSpec, CmpOp, Filter, Literal};
pub use join_tree::{JoinTree, RootedJoinTree};
pub use variable_order::{VariableOrder, VoNode};
pub use view_dag::{decompose_aggregates, DecomposeOptions, RestrictedSpec, ViewDag, ViewDef, ViewGroup, ViewId};

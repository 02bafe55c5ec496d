//! Reduced ordered multi-valued decision diagrams used as a generic global
//! constraint.
//!
//! * [`mdd`] compiles constraints into canonical diagrams.
//! * [`propagator`] maintains generalized arc consistency on one diagram
//!   during backtracking search, keeps it reduced and detects entailment.
//! * [`search`] hosts several diagram constraints in a depth-first solver.
//! * [`oracle`] holds brute-force reference implementations for testing.

pub mod dyn_reduce;
pub mod error;
pub mod families;
pub mod gen;
pub mod mdd;
pub mod oracle;
pub mod propagator;
pub mod script;
pub mod search;

pub use error::{InstanceError, MddError, OracleError, PropagatorError};
pub use mdd::{structural_equal, Mdd, NodeId, Value};
pub use propagator::{
    Propagation, PropagatorConfig, PropagatorState, PropagatorStats, StateSnapshot,
};

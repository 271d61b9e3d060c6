//! Exact Shannon entropy for circuit formulas.
//!
//! A circuit formula is a CNF `φ(X, Y)` in which every solution's output
//! part `Y` is determined by its input part `X`. Its entropy is taken over
//! the output distribution induced by a uniform choice of satisfying inputs.
//!
//! The engine in [`pse`] searches over the outputs, splitting the residual
//! formula into variable-disjoint components, and hands output-free
//! components to the exact model counter in [`counter`]. The search trace is
//! an algebraic decision diagram with conjunctive decomposition, which
//! [`addand`] can materialize, evaluate and export.

pub mod addand;
pub mod baseline;
pub mod counter;
mod error;
pub mod formula;
pub mod numeric;
pub mod ordering;
pub mod preprocess;
pub mod pse;

pub use crate::addand::{build_from_trace, AddAndDiagram, Node, NodeId};
pub use crate::baseline::baseline_entropy;
pub use crate::counter::{BigCount, SharedCache};
pub use crate::error::{Error, Result};
pub use crate::formula::{Assignment, CircuitFormula, Clause, Lit, Var};
pub use crate::preprocess::{apply_pre, PreResult};
pub use crate::pse::{pse_entropy, EntropyResult, Heuristic, PseConfig, Trace};


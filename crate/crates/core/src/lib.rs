//! Algebraic reduction multigrid for advection-type systems.
//!
//! The pieces, bottom up: CSR kernels ([`sparse`]), the upwind test problem
//! ([`problem`]), coarse/fine splitting ([`splitting`]), polynomial inverse
//! approximations ([`poly`]), hierarchy construction ([`hierarchy`]) and the
//! V-cycle solver ([`solve`]).

// `!(x > 0.0)` is used on purpose so NaN fails parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hierarchy;
pub mod poly;
pub mod problem;
pub mod seeds;
pub mod solve;
pub mod sparse;
pub mod splitting;

pub use error::{Error, Result};
pub use hierarchy::{estimate_truncate_start_level, setup, Hierarchy, HierarchySummary, InverseType, SetupConfig, SetupTimings};
pub use poly::{PolyKind, PolySolver};
pub use problem::AdvectionProblem;
pub use solve::{richardson_solve, vcycle, SolveConfig, SolveStats};
pub use sparse::SparseMatrix;
pub use splitting::{CfLabel, CfSplit};

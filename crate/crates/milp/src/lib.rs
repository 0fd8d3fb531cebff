//! A small, self-contained mixed-integer linear programming toolkit.
//!
//! The crate provides a sparse [`Model`] representation, a bounded-variable
//! dual simplex ([`DualSimplex`]) working on an explicit basis inverse, an
//! LP-based branch-and-bound driver ([`solve_milp`]) and a writer for the
//! CPLEX-style LP text format ([`write_lp`]).
//!
//! Everything is minimization. Problems are expected to be small to medium
//! sized (a few thousand columns, several hundred rows), which is the regime
//! where a dense basis inverse with rank-one updates is competitive.

mod backend;
mod bnb;
mod error;
mod lp_format;
mod model;
mod simplex;

pub use backend::{BuiltinBackend, ExternalCommandBackend, MilpBackend};
pub use bnb::{
    solve_milp, solve_milp_with, BranchingRule, IncumbentHeuristic, MilpSolution, MilpStatus,
    NodeSelection, NodeTrace, SolveOptions,
};
pub use error::{MilpError, Result};
pub use lp_format::{format_coefficient, write_lp};
pub use model::{Constraint, Model, Sense, VarKind, Variable};
pub use simplex::{solve_lp, DualSimplex, LpOptions, LpSolution, LpStatus};

//! Solver-agnostic smooth constrained optimization: minimize `f(z)` subject
//! to variable bounds, equalities `c_E(z) = 0`, and inequalities
//! `c_I(z) ≥ 0`.
//!
//! [`NlpProblem`] is the interface the multiple-shooting transcription
//! produces; [`solve`] is the in-tree reference solver (augmented
//! Lagrangian over projected limited-memory BFGS). Third-party solvers can
//! be adapters behind the same trait. Solution quality is certified by
//! [`kkt_residual`], never by the objective value alone.

mod kkt;
mod problem;
mod report;
mod solver;
pub mod test_problems;

pub use kkt::{kkt_residual, KktResidual, Multipliers};
pub use problem::{EvalError, JacobianStructure, NlpProblem};
pub use report::{MajorIteration, SolverReport, SolverStatus};
pub use solver::{solve, solve_multi_start, solve_warm_started, solve_with_log, SolveError, SolverOptions};

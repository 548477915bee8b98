//! The mAb-maximization optimal control problem and its transcription to a
//! sparse NLP by direct multiple shooting.
//!
//! The horizon is split into N zero-order-hold intervals. Decision
//! variables are the control moves (optionally blocked) and the state at
//! every interval end; "defect" equalities `x_{k+1} = Φ(x_k, u_k)` tie
//! consecutive nodes together through the integrator, and path bounds act
//! on the shooting nodes exactly as the problem statement prescribes.

mod grid;
mod pack;
mod solution;
mod spec;
mod transcription;

pub use grid::ControlGrid;
pub use pack::{pack, unpack, DecisionLayout, PackError, VarScale, FREE_INPUTS, STATE_DIM};
pub use solution::{
    extract_solution, initial_guess, mid_range_input, GuessError, GuessStrategy, SolutionTrajectory,
    GAP_TOLERANCE,
};
pub use spec::{OcpBounds, OcpError, OcpSpec, OptimizationSetup};
pub use transcription::{costate_multipliers, defect_norm, ShootingNlp};

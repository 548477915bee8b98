//! The base-case operating recipe and open-loop simulation.
//!
//! The reactor runs a 14-day fermentation in three phases:
//!
//! 1. **Batch** — no inlets or outlets; the culture grows on the initial
//!    glucose charge.
//! 2. **Fed-batch** — once a day a 30-minute bolus feeds water and glucose
//!    at a combined 0.018 L/min (mixed glucose concentration 32 g/L).
//! 3. **Perfusion** — continuous feed balanced by the perfusion outlet
//!    (0.0015 L/min, feed mix 8.65 g/L), so the volume holds steady.
//!
//! Samples are drawn through the whole-broth outlet `F_out`; the published
//! description leaves their size and timing open, so the schedule carries
//! them as an explicit, configurable list.

mod recipe;
mod trajectory;

pub use recipe::{build_base_case, BolusSpec, PerfusionSpec, PhaseSchedule, SamplingDraw, ScheduleError};
pub use trajectory::{
    assemble_trajectory,
    simulate, summarize, SimulateError, Summary, Trajectory, TrajectoryMetrics, TrajectoryWarnings,
};

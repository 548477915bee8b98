//! Initial guesses for the transcribed problem and recovery of a
//! simulation-grade trajectory from a solution vector.

use crate::integrator::IntegratorOptions;
use crate::model::Input;
use crate::scenario::{self, build_base_case, PhaseSchedule, ScheduleError, Trajectory};

use super::pack::{pack, DecisionLayout};
use super::transcription::ShootingNlp;
use super::OcpSpec;

#[derive(Debug, Clone)]
pub enum GuessStrategy {
    /// Pack the base-case recipe: controls are block-averaged (preserving
    /// fed volumes), `F_out` is replaced by the setup's fixed sequence, and
    /// the states come from simulating exactly those controls, so the
    /// defects vanish by construction.
    BaseCase(PhaseSchedule),
    /// Hold one input over the whole horizon (clamped to bounds) and pack
    /// the corresponding simulation. With all flows zero this is the pure
    /// batch trajectory.
    ConstantFeed(Input),
}

#[derive(Debug, thiserror::Error)]
pub enum GuessError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("guess simulation failed: {0}")]
    Simulation(#[from] scenario::SimulateError),
    #[error("packing failed: {0}")]
    Pack(#[from] super::pack::PackError),
}

/// Builds a defect-feasible starting point for `spec`.
pub fn initial_guess(spec: &OcpSpec, strategy: &GuessStrategy) -> Result<Vec<f64>, GuessError> {
    let layout = DecisionLayout::new(spec);
    let grid = &spec.grid;
    let mut inputs: Vec<Input> = match strategy {
        GuessStrategy::BaseCase(schedule) => {
            let raw = build_base_case(schedule, grid)?;
            block_average(&raw, &layout)
        }
        GuessStrategy::ConstantFeed(input) => {
            let b = &spec.bounds;
            let clamped = Input {
                f_water: input.f_water.clamp(b.f_min, b.f_max),
                f_glucose: input.f_glucose.clamp(b.f_min, b.f_max),
                f_perfusion: input.f_perfusion.clamp(b.f_min, b.f_max),
                f_out: 0.0,
                temperature: input.temperature.clamp(b.t_min, b.t_max),
            };
            vec![clamped; grid.num_intervals]
        }
    };
    for (u, &f_out) in inputs.iter_mut().zip(&spec.fixed_f_out) {
        u.f_out = f_out;
    }
    let traj = scenario::simulate(&spec.x0, &inputs, grid, &spec.params, &spec.integrator)?;
    Ok(pack(&layout, &inputs, &traj.states[1..])?)
}

/// The mid-range constant input for [`GuessStrategy::ConstantFeed`].
pub fn mid_range_input(spec: &OcpSpec) -> Input {
    let b = &spec.bounds;
    Input::new(
        0.5 * (b.f_min + b.f_max),
        0.5 * (b.f_min + b.f_max),
        0.5 * (b.f_min + b.f_max),
        0.0,
        0.5 * (b.t_min + b.t_max),
    )
}

/// Averages the free input components over each move-blocking block. For
/// flows this preserves the volume fed per block; a 30-minute bolus spread
/// over a 4-hour block delivers the same feed, more slowly.
fn block_average(inputs: &[Input], layout: &DecisionLayout) -> Vec<Input> {
    let m = layout.move_blocking;
    let mut out = Vec::with_capacity(inputs.len());
    for b in 0..layout.num_blocks {
        let chunk = &inputs[b * m..(b + 1) * m];
        let inv = 1.0 / m as f64;
        let avg = Input {
            f_water: chunk.iter().map(|u| u.f_water).sum::<f64>() * inv,
            f_glucose: chunk.iter().map(|u| u.f_glucose).sum::<f64>() * inv,
            f_perfusion: chunk.iter().map(|u| u.f_perfusion).sum::<f64>() * inv,
            f_out: 0.0,
            temperature: chunk.iter().map(|u| u.temperature).sum::<f64>() * inv,
        };
        out.extend(std::iter::repeat_n(avg, m));
    }
    out
}

/// A solution vector seen two ways: the NLP's own node states, and an
/// open-loop re-simulation of the same controls at tight tolerance. A gap
/// beyond `GAP_TOLERANCE` between the two flags a transcription or
/// tolerance problem.
#[derive(Debug, Clone)]
pub struct SolutionTrajectory {
    /// Node states as the NLP sees them.
    pub nodes: Trajectory,
    /// Re-simulated open-loop trajectory of the same controls.
    pub resimulated: Trajectory,
    /// Largest relative per-component gap between the two, over all nodes.
    pub max_relative_gap: f64,
    pub consistent: bool,
}

pub const GAP_TOLERANCE: f64 = 1e-4;

/// Re-simulates the controls in `z` open-loop and reports both views.
pub fn extract_solution(nlp: &ShootingNlp, z: &[f64]) -> Result<SolutionTrajectory, GuessError> {
    let spec: &OcpSpec = nlp.spec();
    let (inputs, node_states) = nlp.unpack(z);
    let grid = &spec.grid;

    let tight = IntegratorOptions {
        rel_tol: (spec.integrator.rel_tol * 1e-2).max(1e-12),
        abs_tol: (spec.integrator.abs_tol * 1e-2).max(1e-14),
        ..spec.integrator
    };
    let resimulated = scenario::simulate(&spec.x0, &inputs, grid, &spec.params, &tight)?;

    let mut all_states = Vec::with_capacity(grid.num_intervals + 1);
    all_states.push(spec.x0);
    all_states.extend_from_slice(&node_states);
    let times: Vec<f64> = (0..=grid.num_intervals).map(|k| grid.node_time(k)).collect();
    let nodes = scenario::assemble_trajectory(times, all_states, inputs);

    let layout = nlp.layout();
    let mut max_relative_gap = 0.0f64;
    for (a, b) in nodes.states.iter().zip(&resimulated.states) {
        let (aa, ba) = (a.to_array(), b.to_array());
        for i in 0..6 {
            let scale = layout.state_scales[i].range;
            let gap = (aa[i] - ba[i]).abs() / scale;
            max_relative_gap = max_relative_gap.max(gap);
        }
    }
    Ok(SolutionTrajectory {
        nodes,
        resimulated,
        max_relative_gap,
        consistent: max_relative_gap <= GAP_TOLERANCE,
    })
}

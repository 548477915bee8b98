use serde::{Deserialize, Serialize};

use crate::integrator::IntegratorOptions;
use crate::model::{ModelParameters, State};
use crate::scenario::{PhaseSchedule, ScheduleError};

use super::ControlGrid;

/// Operating envelope of the optimal control problem: state path bounds
/// applied at shooting nodes 1..N and input bounds applied per control move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcpBounds {
    pub v_min: f64,
    pub v_max: f64,
    pub m_g_min: f64,
    pub m_l_min: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for OcpBounds {
    fn default() -> Self {
        OcpBounds {
            v_min: 4.0,
            v_max: 8.0,
            m_g_min: 0.0,
            m_l_min: 0.0,
            f_min: 0.0,
            f_max: 0.02,
            t_min: 308.15,
            t_max: 310.15,
        }
    }
}

impl OcpBounds {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_min > 0.0 && self.v_min < self.v_max) {
            return Err("volume bounds must satisfy 0 < v_min < v_max".into());
        }
        if !(self.f_min <= self.f_max && self.f_min >= 0.0) {
            return Err("flow bounds must satisfy 0 <= f_min <= f_max".into());
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max) {
            return Err("temperature bounds must satisfy 0 < t_min < t_max".into());
        }
        Ok(())
    }
}

/// One of the four published optimization setups: sampling either disabled
/// or fixed to the base-case draw sequence, and the terminal glucose mass
/// either free or capped at 1 g ("full glucose utilization").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizationSetup {
    /// Fix `F_out` to the base-case sampling sequence instead of zero.
    pub sampling: bool,
    /// Enforce `m_G(t_f) ≤ 1 g`.
    pub full_glucose_utilization: bool,
}

impl OptimizationSetup {
    /// Setup ids follow the published numbering:
    /// 1 = no sampling, free glucose; 2 = no sampling, forced utilization;
    /// 3 = sampling, free glucose; 4 = sampling, forced utilization.
    pub fn from_id(id: u8) -> Result<Self, OcpError> {
        match id {
            1 => Ok(OptimizationSetup { sampling: false, full_glucose_utilization: false }),
            2 => Ok(OptimizationSetup { sampling: false, full_glucose_utilization: true }),
            3 => Ok(OptimizationSetup { sampling: true, full_glucose_utilization: false }),
            4 => Ok(OptimizationSetup { sampling: true, full_glucose_utilization: true }),
            other => Err(OcpError::UnknownSetup(other)),
        }
    }

    pub fn id(&self) -> u8 {
        1 + self.full_glucose_utilization as u8 + 2 * self.sampling as u8
    }

    /// Upper bound on the terminal glucose mass [g].
    pub fn terminal_glucose_bound(&self) -> f64 {
        if self.full_glucose_utilization {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OcpError {
    #[error("unknown optimization setup id {0} (valid: 1-4)")]
    UnknownSetup(u8),
    #[error("invalid control grid: {0}")]
    BadGrid(String),
    #[error("invalid bounds: {0}")]
    BadBounds(String),
    #[error("sampling sequence has {got} entries, grid needs {expected}")]
    SamplingLength { expected: usize, got: usize },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// A fully specified instance of the mAb-maximization optimal control
/// problem: maximize `m_P(t_f)` over the control moves subject to the
/// operating envelope, with `F_out` fixed per setup.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpSpec {
    pub grid: ControlGrid,
    pub x0: State,
    pub bounds: OcpBounds,
    pub params: ModelParameters,
    pub integrator: IntegratorOptions,
    pub setup: OptimizationSetup,
    /// Fixed sampling-outlet trajectory, one entry per interval; all zeros
    /// for the no-sampling setups.
    pub fixed_f_out: Vec<f64>,
    /// Upper bound on m_G at the final node [g]; +∞ when inactive. Realized
    /// as a tightened variable bound on that node, which is exactly
    /// equivalent to the one-sided terminal inequality.
    pub terminal_glucose_bound: f64,
}

impl OcpSpec {
    /// Builds the OCP for one setup. The schedule supplies the base-case
    /// sampling draws for the setups that keep sampling.
    pub fn build(
        setup_id: u8,
        grid: ControlGrid,
        x0: State,
        bounds: OcpBounds,
        params: ModelParameters,
        integrator: IntegratorOptions,
        schedule: &PhaseSchedule,
    ) -> Result<OcpSpec, OcpError> {
        let setup = OptimizationSetup::from_id(setup_id)?;
        grid.validate().map_err(OcpError::BadGrid)?;
        bounds.validate().map_err(OcpError::BadBounds)?;
        let fixed_f_out = if setup.sampling {
            schedule.sampling_sequence(&grid)?
        } else {
            vec![0.0; grid.num_intervals]
        };
        Ok(OcpSpec {
            grid,
            x0,
            bounds,
            params,
            integrator,
            setup,
            fixed_f_out,
            terminal_glucose_bound: setup.terminal_glucose_bound(),
        })
    }

    /// Number of terminal inequalities the transcription folds into
    /// variable bounds (1 when the glucose-utilization cap is active).
    pub fn num_terminal_inequalities(&self) -> usize {
        self.terminal_glucose_bound.is_finite() as usize
    }
}

//! Adaptive integration of the reactor ODE over zero-order-hold control
//! intervals, with first-order forward sensitivities.
//!
//! The scheme is an explicit Dormand-Prince 5(4) embedded pair with
//! per-component error control. The model is non-stiff at its published
//! parameterization (effective rates below 1e-3 min⁻¹; bolus transients are
//! interval boundaries under zero-order hold), so an explicit pair is the
//! right tool. Control-interval boundaries are hard restart points: no step
//! ever spans an input discontinuity.
//!
//! Sensitivities solve the variational equations
//!
//! ```text
//! A' = (∂f/∂x) A,   A(t₀) = I        (6×6)
//! B' = (∂f/∂x) B + ∂f/∂u,  B(t₀) = 0 (6×5)
//! ```
//!
//! appended to the state and integrated in the same sweep. The error norm is
//! taken over the state components only, so the augmented system reproduces
//! the nominal step sequence exactly and `x_end` is bit-identical to a plain
//! [`integrate`] call.

mod dopri5;
mod sensitivity;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::model::{self, Input, ModelError, ModelParameters, State};

pub(crate) use dopri5::integrate_adaptive;

/// Tolerances and budgets for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    /// Relative tolerance per state component.
    pub rel_tol: f64,
    /// Absolute tolerance per state component.
    pub abs_tol: f64,
    /// Maximum number of steps per interval.
    pub max_steps: usize,
    /// Optional initial step-size hint [min].
    pub initial_step: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err("integrator tolerances must be positive".into());
        }
        Ok(())
    }
}

/// Integration failures, reported with the time at which they occurred.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("step budget of {max_steps} exhausted at t = {t} min")]
    StepBudgetExhausted { t: f64, max_steps: usize },
    #[error("step size underflow at t = {t} min")]
    StepSizeUnderflow { t: f64 },
    #[error("model evaluation rejected at t = {t} min: {source}")]
    Model { t: f64, source: ModelError },
    #[error("integration interval must satisfy t_end >= t0, got [{t0}, {t_end}]")]
    BadInterval { t0: f64, t_end: f64 },
}

/// End state plus sensitivities over one zero-order-hold interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    pub x_end: State,
    /// A = ∂x(t_end)/∂x(t₀); identity at zero elapsed time.
    pub state_sensitivity: SMatrix<f64, 6, 6>,
    /// B = ∂x(t_end)/∂u for the input held over the interval; zero at zero
    /// elapsed time.
    pub input_sensitivity: SMatrix<f64, 6, 5>,
}

/// Integrates the reactor ODE from `x0` over `[t0, t_end]` with the input
/// held constant (zero-order hold).
pub fn integrate(
    x0: &State,
    u: &Input,
    t0: f64,
    t_end: f64,
    p: &ModelParameters,
    opts: &IntegratorOptions,
) -> Result<State, IntegrateError> {
    if !(x0.volume > 0.0) {
        return Err(IntegrateError::Model {
            t: t0,
            source: ModelError::NonPositiveVolume { volume: x0.volume },
        });
    }
    let u_arr = u.to_array();
    let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let x: &[f64; 6] = y.try_into().expect("state dimension");
        let d = model::rhs_raw(x, &u_arr, p)?;
        dy.copy_from_slice(&d);
        Ok(())
    };
    let y = integrate_adaptive(&mut f, t0, t_end, &x0.to_array(), State::DIM, opts)?;
    Ok(State::from_array(y.try_into().expect("state dimension")))
}

/// As [`integrate`], but additionally propagates the sensitivity matrices
/// A = ∂x_end/∂x₀ and B = ∂x_end/∂u along the same step sequence.
pub fn integrate_with_sensitivities(
    x0: &State,
    u: &Input,
    t0: f64,
    t_end: f64,
    p: &ModelParameters,
    opts: &IntegratorOptions,
) -> Result<SensitivityResult, IntegrateError> {
    sensitivity::run(x0, u, t0, t_end, p, opts)
}

/// Fixed-step drive of the same 5th-order scheme. Useful as a reference
/// solution at small steps; the adaptive driver is preferred otherwise.
pub fn integrate_fixed(
    x0: &State,
    u: &Input,
    t0: f64,
    t_end: f64,
    n_steps: usize,
    p: &ModelParameters,
) -> Result<State, IntegrateError> {
    let u_arr = u.to_array();
    let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let x: &[f64; 6] = y.try_into().expect("state dimension");
        let d = model::rhs_raw(x, &u_arr, p)?;
        dy.copy_from_slice(&d);
        Ok(())
    };
    let y = dopri5::integrate_fixed_steps(&mut f, t0, t_end, &x0.to_array(), n_steps)?;
    Ok(State::from_array(y.try_into().expect("state dimension")))
}

#[allow(unused)]
pub(crate) fn identity_sensitivities(x0: &State) -> SensitivityResult {
    SensitivityResult {
        x_end: *x0,
        state_sensitivity: SMatrix::identity(),
        input_sensitivity: SMatrix::zeros(),
    }
}

#[cfg(test)]
mod tests;

//! Direct multiple shooting: the OCP becomes a sparse NLP whose variables
//! are the control moves and the states at every interval end, tied
//! together by defect equalities `x_{k+1} - Φ(x_k, u_k) = 0`.

use std::sync::Mutex;

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;

use crate::integrator::{integrate, integrate_with_sensitivities, IntegrateError};
use crate::model::{Input, State};
use crate::nlp::{EvalError, JacobianStructure, Multipliers, NlpProblem};

use super::pack::{unpack, DecisionLayout, FREE_INPUTS, STATE_DIM};
use super::OcpSpec;

/// The transcribed problem. Objective: `-m_P` at the final node [g] (the
/// node variable is scaled, so the single gradient entry is the mass
/// range). Equalities: the `6N` scaled defects. The terminal glucose cap,
/// when present, lives in the variable bounds of the last node.
///
/// Interval integrations within one evaluation run in parallel; each
/// interval writes its own slot, so results do not depend on scheduling.
pub struct ShootingNlp {
    spec: OcpSpec,
    layout: DecisionLayout,
    structure: JacobianStructure,
    cache: Mutex<EvalCache>,
}

#[derive(Default)]
struct EvalCache {
    /// Point the cache was filled at.
    z: Vec<f64>,
    /// Φ(x_k, u_k) per interval.
    end_states: Vec<State>,
    /// (A_k, B_k) per interval; populated lazily on Jacobian requests.
    sensitivities: Option<Vec<(SMatrix<f64, 6, 6>, SMatrix<f64, 6, 5>)>>,
}

impl ShootingNlp {
    pub fn new(spec: OcpSpec) -> Self {
        let layout = DecisionLayout::new(&spec);
        let structure = build_structure(&layout);
        ShootingNlp { spec, layout, structure, cache: Mutex::new(EvalCache::default()) }
    }

    pub fn spec(&self) -> &OcpSpec {
        &self.spec
    }

    pub fn layout(&self) -> &DecisionLayout {
        &self.layout
    }

    /// Unpacks a decision vector into per-interval inputs and node states.
    pub fn unpack(&self, z: &[f64]) -> (Vec<Input>, Vec<State>) {
        unpack(&self.layout, &self.spec.fixed_f_out, z)
    }

    fn shoot(&self, z: &[f64], want_sensitivities: bool) -> Result<(), EvalError> {
        {
            let cache = self.cache.lock().unwrap();
            if cache.z == z && (!want_sensitivities || cache.sensitivities.is_some()) {
                return Ok(());
            }
        }
        let (inputs, states) = self.unpack(z);
        let n = self.layout.num_intervals;
        let opts = &self.spec.integrator;
        let p = &self.spec.params;
        let grid = &self.spec.grid;
        let start_of = |k: usize| if k == 0 { self.spec.x0 } else { states[k - 1] };

        if want_sensitivities {
            let results: Vec<Result<_, IntegrateError>> = (0..n)
                .into_par_iter()
                .map(|k| {
                    let r = integrate_with_sensitivities(
                        &start_of(k),
                        &inputs[k],
                        grid.node_time(k),
                        grid.node_time(k + 1),
                        p,
                        opts,
                    )?;
                    Ok((r.x_end, (r.state_sensitivity, r.input_sensitivity)))
                })
                .collect();
            let mut end_states = Vec::with_capacity(n);
            let mut sens = Vec::with_capacity(n);
            for (k, r) in results.into_iter().enumerate() {
                let (x, ab) = r.map_err(|e| EvalError::new(format!("interval {k}: {e}")))?;
                end_states.push(x);
                sens.push(ab);
            }
            let mut cache = self.cache.lock().unwrap();
            cache.z = z.to_vec();
            cache.end_states = end_states;
            cache.sensitivities = Some(sens);
        } else {
            let results: Vec<Result<State, IntegrateError>> = (0..n)
                .into_par_iter()
                .map(|k| {
                    integrate(&start_of(k), &inputs[k], grid.node_time(k), grid.node_time(k + 1), p, opts)
                })
                .collect();
            let mut end_states = Vec::with_capacity(n);
            for (k, r) in results.into_iter().enumerate() {
                end_states.push(r.map_err(|e| EvalError::new(format!("interval {k}: {e}")))?);
            }
            let mut cache = self.cache.lock().unwrap();
            cache.z = z.to_vec();
            cache.end_states = end_states;
            cache.sensitivities = None;
        }
        Ok(())
    }
}

fn build_structure(layout: &DecisionLayout) -> JacobianStructure {
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for k in 0..layout.num_intervals {
        let block = k / layout.move_blocking;
        for i in 0..STATE_DIM {
            let row = k * STATE_DIM + i;
            if k >= 1 {
                for j in 0..STATE_DIM {
                    rows.push(row);
                    cols.push(layout.state_index(k, j));
                }
            }
            for j in 0..FREE_INPUTS {
                rows.push(row);
                cols.push(layout.input_index(block, j));
            }
            rows.push(row);
            cols.push(layout.state_index(k + 1, i));
        }
    }
    JacobianStructure { rows, cols }
}

/// Column indices of the model input vector backing each free input.
const FREE_INPUT_COLUMNS: [usize; FREE_INPUTS] = [0, 1, 2, 4];

impl NlpProblem for ShootingNlp {
    fn num_vars(&self) -> usize {
        self.layout.dim()
    }

    fn num_eq(&self) -> usize {
        self.layout.num_intervals * STATE_DIM
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.layout.bounds(&self.spec.bounds, self.spec.terminal_glucose_bound)
    }

    fn objective(&self, z: &[f64]) -> Result<f64, EvalError> {
        // -m_P(t_f) in grams; a pure read of the final node variable.
        let idx = self.layout.state_index(self.layout.num_intervals, 5);
        Ok(-self.layout.state_scales[5].to_raw(z[idx]))
    }

    fn gradient(&self, _z: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        grad.fill(0.0);
        let idx = self.layout.state_index(self.layout.num_intervals, 5);
        grad[idx] = -self.layout.state_scales[5].range;
        Ok(())
    }

    fn eq_constraints(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.shoot(z, false)?;
        let cache = self.cache.lock().unwrap();
        for k in 0..self.layout.num_intervals {
            let shot = cache.end_states[k].to_array();
            for i in 0..STATE_DIM {
                let node = z[self.layout.state_index(k + 1, i)];
                out[k * STATE_DIM + i] = node - self.layout.state_scales[i].to_scaled(shot[i]);
            }
        }
        Ok(())
    }

    fn eq_jacobian_structure(&self) -> JacobianStructure {
        self.structure.clone()
    }

    fn eq_jacobian_values(&self, z: &[f64], values: &mut [f64]) -> Result<(), EvalError> {
        self.shoot(z, true)?;
        let cache = self.cache.lock().unwrap();
        let sens = cache.sensitivities.as_ref().expect("sensitivities populated");
        let scales = &self.layout.state_scales;
        let in_scales = &self.layout.input_scales;
        let mut slot = 0;
        for (k, (a, b)) in sens.iter().enumerate() {
            for i in 0..STATE_DIM {
                let row_scale = scales[i].range;
                if k >= 1 {
                    for j in 0..STATE_DIM {
                        values[slot] = -a[(i, j)] * scales[j].range / row_scale;
                        slot += 1;
                    }
                }
                for (j, &col) in FREE_INPUT_COLUMNS.iter().enumerate() {
                    values[slot] = -b[(i, col)] * in_scales[j].range / row_scale;
                    slot += 1;
                }
                values[slot] = 1.0;
                slot += 1;
            }
        }
        debug_assert_eq!(slot, values.len());
        Ok(())
    }
}

/// Objective and defect values at a packed trajectory, mainly for tests and
/// diagnostics.
pub fn defect_norm(nlp: &ShootingNlp, z: &[f64]) -> Result<f64, EvalError> {
    let mut c = vec![0.0; nlp.num_eq()];
    nlp.eq_constraints(z, &mut c)?;
    Ok(c.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// First-order multiplier estimates for the defect constraints at `z` via
/// the costate recursion `λ_{N-1} = ∇φ(x_N)`, `λ_{k-1} = Ã_kᵀ λ_k`.
/// Seeding the solver with these makes the first subproblem behave like a
/// reduced-gradient method on the controls instead of fighting the linear
/// objective with the penalty alone.
pub fn costate_multipliers(nlp: &ShootingNlp, z: &[f64]) -> Result<Multipliers, EvalError> {
    nlp.shoot(z, true)?;
    let cache = nlp.cache.lock().unwrap();
    let sens = cache.sensitivities.as_ref().expect("sensitivities populated");
    let scales = &nlp.layout.state_scales;
    let n = nlp.layout.num_intervals;

    let mut eq = vec![0.0; n * STATE_DIM];
    // λ_{N-1} = ∇φ over the final node: φ = -m_P in grams.
    let mut costate = SVector::<f64, 6>::zeros();
    costate[5] = -scales[5].range;
    eq[(n - 1) * STATE_DIM..].copy_from_slice(costate.as_slice());
    for k in (1..n).rev() {
        let a = &sens[k].0;
        let mut a_scaled = SMatrix::<f64, 6, 6>::zeros();
        for i in 0..STATE_DIM {
            for j in 0..STATE_DIM {
                a_scaled[(i, j)] = a[(i, j)] * scales[j].range / scales[i].range;
            }
        }
        costate = a_scaled.transpose() * costate;
        eq[(k - 1) * STATE_DIM..k * STATE_DIM].copy_from_slice(costate.as_slice());
    }
    Ok(Multipliers { eq, ineq: vec![] })
}

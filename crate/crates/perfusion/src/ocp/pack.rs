//! Decision-vector layout and scaling.
//!
//! The multiple-shooting decision vector is
//!
//! ```text
//! ξ = [ u_b : b = 0..N_blocks ; x_k : k = 1..N ]
//! ```
//!
//! with four free inputs per block in the order (F_W, F_G, F_per, T) — the
//! sampling outlet `F_out` is fixed data in every setup — and six state
//! components per node in the order (V, m_Xv, m_Xd, m_G, m_L, m_P). Raw
//! magnitudes span five orders, so every variable is mapped affinely to
//! O(1) by `(v - offset) / range`. Offsets are the lower bounds and ranges
//! are powers of two at least as large as the physical spread, which makes
//! pack followed by unpack reproduce the original values bit for bit.

use crate::model::{Input, State};

use super::{OcpBounds, OcpSpec};

pub const FREE_INPUTS: usize = 4;
pub const STATE_DIM: usize = 6;

/// Affine scaling of one variable: `scaled = (raw - offset) / range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarScale {
    pub offset: f64,
    pub range: f64,
}

impl VarScale {
    #[inline]
    pub fn to_scaled(&self, raw: f64) -> f64 {
        (raw - self.offset) / self.range
    }

    #[inline]
    pub fn to_raw(&self, scaled: f64) -> f64 {
        scaled * self.range + self.offset
    }
}

/// Smallest power of two ≥ `x`.
fn pow2_at_least(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite());
    let mut p = 1.0f64;
    while p < x {
        p *= 2.0;
    }
    while p * 0.5 >= x {
        p *= 0.5;
    }
    p
}

/// Fixed variable layout and scaling for one OCP instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionLayout {
    pub num_intervals: usize,
    pub num_blocks: usize,
    pub move_blocking: usize,
    /// Scales for (F_W, F_G, F_per, T).
    pub input_scales: [VarScale; FREE_INPUTS],
    /// Scales for (V, m_Xv, m_Xd, m_G, m_L, m_P).
    pub state_scales: [VarScale; STATE_DIM],
}

/// Characteristic mass ranges [10⁹ cells, g] used for the unbounded state
/// components.
const CELL_RANGE: f64 = 64.0;
const MASS_RANGE: f64 = 128.0;

impl DecisionLayout {
    pub fn new(spec: &OcpSpec) -> Self {
        let b = &spec.bounds;
        let flow = VarScale { offset: 0.0, range: pow2_at_least(b.f_max.max(1e-6)) };
        let temp = VarScale { offset: b.t_min, range: pow2_at_least(b.t_max - b.t_min) };
        let volume = VarScale { offset: b.v_min, range: pow2_at_least(b.v_max - b.v_min) };
        let cells = VarScale { offset: 0.0, range: CELL_RANGE };
        let mass = VarScale { offset: 0.0, range: MASS_RANGE };
        DecisionLayout {
            num_intervals: spec.grid.num_intervals,
            num_blocks: spec.grid.num_blocks(),
            move_blocking: spec.grid.move_blocking,
            input_scales: [flow, flow, flow, temp],
            state_scales: [volume, cells, cells, mass, mass, mass],
        }
    }

    pub fn dim(&self) -> usize {
        self.num_blocks * FREE_INPUTS + self.num_intervals * STATE_DIM
    }

    /// Index of free input `j` of block `b`.
    pub fn input_index(&self, block: usize, j: usize) -> usize {
        debug_assert!(block < self.num_blocks && j < FREE_INPUTS);
        block * FREE_INPUTS + j
    }

    /// Index of state component `i` of node `k` (k = 1..=N).
    pub fn state_index(&self, node: usize, i: usize) -> usize {
        debug_assert!((1..=self.num_intervals).contains(&node) && i < STATE_DIM);
        self.num_blocks * FREE_INPUTS + (node - 1) * STATE_DIM + i
    }

    /// Scaled variable bounds for the whole decision vector.
    pub fn bounds(&self, ocp: &OcpBounds, terminal_glucose_bound: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let mut lb = vec![f64::NEG_INFINITY; n];
        let mut ub = vec![f64::INFINITY; n];
        for b in 0..self.num_blocks {
            for j in 0..3 {
                let idx = self.input_index(b, j);
                lb[idx] = self.input_scales[j].to_scaled(ocp.f_min);
                ub[idx] = self.input_scales[j].to_scaled(ocp.f_max);
            }
            let idx = self.input_index(b, 3);
            lb[idx] = self.input_scales[3].to_scaled(ocp.t_min);
            ub[idx] = self.input_scales[3].to_scaled(ocp.t_max);
        }
        for k in 1..=self.num_intervals {
            let v = self.state_index(k, 0);
            lb[v] = self.state_scales[0].to_scaled(ocp.v_min);
            ub[v] = self.state_scales[0].to_scaled(ocp.v_max);
            lb[self.state_index(k, 3)] = self.state_scales[3].to_scaled(ocp.m_g_min);
            lb[self.state_index(k, 4)] = self.state_scales[4].to_scaled(ocp.m_l_min);
        }
        if terminal_glucose_bound.is_finite() {
            let idx = self.state_index(self.num_intervals, 3);
            ub[idx] = self.state_scales[3].to_scaled(terminal_glucose_bound);
        }
        (lb, ub)
    }

    /// Free-input components of `u` in layout order.
    fn free_components(u: &Input) -> [f64; FREE_INPUTS] {
        [u.f_water, u.f_glucose, u.f_perfusion, u.temperature]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PackError {
    #[error("expected {expected} inputs and {expected_states} node states, got {got_inputs} and {got_states}")]
    Lengths { expected: usize, expected_states: usize, got_inputs: usize, got_states: usize },
    #[error("inputs are not constant within block {block} (interval {interval} differs)")]
    NotBlockConstant { block: usize, interval: usize },
}

/// Packs a trajectory (inputs per interval, states at nodes 1..N) into a
/// scaled decision vector. The free input components must be constant
/// within each move-blocking block; `F_out` is ignored (it is fixed data).
pub fn pack(layout: &DecisionLayout, inputs: &[Input], node_states: &[State]) -> Result<Vec<f64>, PackError> {
    if inputs.len() != layout.num_intervals || node_states.len() != layout.num_intervals {
        return Err(PackError::Lengths {
            expected: layout.num_intervals,
            expected_states: layout.num_intervals,
            got_inputs: inputs.len(),
            got_states: node_states.len(),
        });
    }
    let mut z = vec![0.0; layout.dim()];
    for b in 0..layout.num_blocks {
        let first = b * layout.move_blocking;
        let head = DecisionLayout::free_components(&inputs[first]);
        for offset in 1..layout.move_blocking {
            let k = first + offset;
            if DecisionLayout::free_components(&inputs[k]) != head {
                return Err(PackError::NotBlockConstant { block: b, interval: k });
            }
        }
        for (j, value) in head.iter().enumerate() {
            z[layout.input_index(b, j)] = layout.input_scales[j].to_scaled(*value);
        }
    }
    for (k, state) in node_states.iter().enumerate() {
        let arr = state.to_array();
        for (i, value) in arr.iter().enumerate() {
            z[layout.state_index(k + 1, i)] = layout.state_scales[i].to_scaled(*value);
        }
    }
    Ok(z)
}

/// Inverse of [`pack`]: expands block controls to per-interval inputs
/// (reinstating the fixed `F_out` sequence) and rebuilds the node states.
pub fn unpack(layout: &DecisionLayout, fixed_f_out: &[f64], z: &[f64]) -> (Vec<Input>, Vec<State>) {
    assert_eq!(z.len(), layout.dim(), "decision vector dimension");
    assert_eq!(fixed_f_out.len(), layout.num_intervals, "fixed F_out length");
    let mut inputs = Vec::with_capacity(layout.num_intervals);
    for k in 0..layout.num_intervals {
        let b = k / layout.move_blocking;
        let raw: Vec<f64> = (0..FREE_INPUTS)
            .map(|j| layout.input_scales[j].to_raw(z[layout.input_index(b, j)]))
            .collect();
        inputs.push(Input {
            f_water: raw[0],
            f_glucose: raw[1],
            f_perfusion: raw[2],
            f_out: fixed_f_out[k],
            temperature: raw[3],
        });
    }
    let mut states = Vec::with_capacity(layout.num_intervals);
    for k in 1..=layout.num_intervals {
        let mut arr = [0.0; STATE_DIM];
        for (i, slot) in arr.iter_mut().enumerate() {
            *slot = layout.state_scales[i].to_raw(z[layout.state_index(k, i)]);
        }
        states.push(State::from_array(arr));
    }
    (inputs, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::IntegratorOptions;
    use crate::model::{ComponentVector, ModelParameters};
    use crate::ocp::ControlGrid;
    use crate::scenario::PhaseSchedule;
    use proptest::prelude::*;

    fn small_spec() -> OcpSpec {
        let mut schedule = PhaseSchedule::default();
        schedule.t_final_min = 480.0;
        schedule.t_batch_end_min = 480.0;
        schedule.t_fedbatch_end_min = 480.0;
        schedule.sampling.clear();
        OcpSpec::build(
            1,
            ControlGrid { num_intervals: 16, interval_min: 30.0, move_blocking: 4 },
            State::new(5.65, ComponentVector::new(3.955, 0.0, 34.18, 0.678, 0.0)),
            Default::default(),
            ModelParameters::default(),
            IntegratorOptions::default(),
            &schedule,
        )
        .unwrap()
    }

    #[test]
    fn pow2_rounding() {
        assert_eq!(pow2_at_least(4.0), 4.0);
        assert_eq!(pow2_at_least(0.02), 0.03125);
        assert_eq!(pow2_at_least(2.0), 2.0);
        assert_eq!(pow2_at_least(1.5), 2.0);
    }

    #[test]
    fn dimension_counts_blocks_and_nodes() {
        let spec = small_spec();
        let layout = DecisionLayout::new(&spec);
        assert_eq!(layout.dim(), 4 * 4 + 16 * 6);
    }

    #[test]
    fn default_scales_are_exact_for_default_bounds() {
        let spec = small_spec();
        let layout = DecisionLayout::new(&spec);
        assert_eq!(layout.state_scales[0], VarScale { offset: 4.0, range: 4.0 });
        assert_eq!(layout.input_scales[0].range, 0.03125);
        assert_eq!(layout.input_scales[3], VarScale { offset: 308.15, range: 2.0 });
    }

    #[test]
    fn terminal_glucose_tightens_last_node_only() {
        let mut spec = small_spec();
        spec.terminal_glucose_bound = 1.0;
        let layout = DecisionLayout::new(&spec);
        let (_, ub) = layout.bounds(&spec.bounds, spec.terminal_glucose_bound);
        let last = layout.state_index(16, 3);
        let prev = layout.state_index(15, 3);
        assert_eq!(ub[last], 1.0 / 128.0);
        assert_eq!(ub[prev], f64::INFINITY);
    }

    proptest! {
        /// Pack followed by unpack is lossless, bit for bit, over the
        /// physical operating ranges.
        #[test]
        fn pack_unpack_round_trip(
            seed_v in 4.0..8.0f64,
            seed_m in 0.0..120.0f64,
            f in 0.0..0.02f64,
            t in 308.15..310.15f64,
        ) {
            let spec = small_spec();
            let layout = DecisionLayout::new(&spec);
            let input = Input::new(f, f * 0.5, f * 0.25, 0.0, t);
            let inputs = vec![input; 16];
            let states: Vec<State> = (0..16)
                .map(|k| State::new(seed_v, ComponentVector::new(
                    seed_m * 0.3 + k as f64 * 0.01,
                    seed_m * 0.05,
                    seed_m,
                    seed_m * 0.11,
                    seed_m * 0.2,
                )))
                .collect();
            let z = pack(&layout, &inputs, &states).unwrap();
            let (inputs2, states2) = unpack(&layout, &spec.fixed_f_out, &z);
            prop_assert_eq!(inputs, inputs2);
            prop_assert_eq!(states, states2);
        }
    }

    #[test]
    fn pack_rejects_non_block_constant_inputs() {
        let spec = small_spec();
        let layout = DecisionLayout::new(&spec);
        let mut inputs = vec![Input::batch(310.15); 16];
        inputs[1].f_glucose = 0.001;
        let states = vec![spec.x0; 16];
        assert!(matches!(
            pack(&layout, &inputs, &states),
            Err(PackError::NotBlockConstant { block: 0, interval: 1 })
        ));
    }
}

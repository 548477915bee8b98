//! Forward sensitivity propagation via the variational equations.
//!
//! The augmented vector is `[x (6) | A column-major (36) | B column-major
//! (30)]`. Error control covers only the leading state block, so the step
//! sequence — and therefore the reported `x_end` — is identical to a plain
//! state integration.

use nalgebra::SMatrix;

use crate::model::{self, Input, ModelError, ModelParameters, State};

use super::dopri5::integrate_adaptive;
use super::{IntegrateError, IntegratorOptions, SensitivityResult};

const N_AUG: usize = 6 + 36 + 30;

pub(super) fn run(
    x0: &State,
    u: &Input,
    t0: f64,
    t_end: f64,
    p: &ModelParameters,
    opts: &IntegratorOptions,
) -> Result<SensitivityResult, IntegrateError> {
    if !(x0.volume > 0.0) {
        return Err(IntegrateError::Model {
            t: t0,
            source: ModelError::NonPositiveVolume { volume: x0.volume },
        });
    }
    let u_arr = u.to_array();

    let mut y0 = [0.0; N_AUG];
    y0[..6].copy_from_slice(&x0.to_array());
    for i in 0..6 {
        y0[6 + i * 6 + i] = 1.0; // A(t0) = I
    }

    let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let x: &[f64; 6] = y[..6].try_into().expect("state dimension");
        let (dx, jx, ju) = model::rhs_raw_with_jacobians(x, &u_arr, p)?;
        dy[..6].copy_from_slice(&dx);
        // A' = J_x A
        for col in 0..6 {
            let a_col = &y[6 + col * 6..6 + col * 6 + 6];
            let out = &mut dy[6 + col * 6..6 + col * 6 + 6];
            for (i, o) in out.iter_mut().enumerate() {
                let row = &jx[i];
                *o = row[0] * a_col[0]
                    + row[1] * a_col[1]
                    + row[2] * a_col[2]
                    + row[3] * a_col[3]
                    + row[4] * a_col[4]
                    + row[5] * a_col[5];
            }
        }
        // B' = J_x B + J_u
        for col in 0..5 {
            let b_col = &y[42 + col * 6..42 + col * 6 + 6];
            let mut out = [0.0; 6];
            for (i, o) in out.iter_mut().enumerate() {
                let row = &jx[i];
                *o = row[0] * b_col[0]
                    + row[1] * b_col[1]
                    + row[2] * b_col[2]
                    + row[3] * b_col[3]
                    + row[4] * b_col[4]
                    + row[5] * b_col[5]
                    + ju[i][col];
            }
            dy[42 + col * 6..42 + col * 6 + 6].copy_from_slice(&out);
        }
        Ok(())
    };

    let y = integrate_adaptive(&mut f, t0, t_end, &y0, State::DIM, opts)?;

    let x_end = State::from_array(y[..6].try_into().expect("state dimension"));
    let state_sensitivity = SMatrix::<f64, 6, 6>::from_fn(|i, j| y[6 + j * 6 + i]);
    let input_sensitivity = SMatrix::<f64, 6, 5>::from_fn(|i, j| y[42 + j * 6 + i]);
    Ok(SensitivityResult {
        x_end,
        state_sensitivity,
        input_sensitivity,
    })
}

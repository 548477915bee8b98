//! The full six-state right-hand side and its Jacobians.

use nalgebra::{SMatrix, SVector};

use super::kinetics::{kinetics, kinetics_with_derivatives};
use super::{ComponentVector, Input, ModelError, ModelParameters, State, Stoichiometry};

/// Fraction of each component removed by the perfusion stream: the filter
/// retains cells and product, spent medium (glucose, lactate) passes.
const PERFUSION_PASS: [f64; 5] = [0.0, 0.0, 1.0, 1.0, 0.0];

/// Jacobians of the right-hand side at one point.
#[derive(Debug, Clone, Copy)]
pub struct RhsJacobians {
    /// ∂f/∂x, 6×6, state order (V, m_Xv, m_Xd, m_G, m_L, m_P).
    pub d_state: SMatrix<f64, 6, 6>,
    /// ∂f/∂u, 6×5, input order (F_W, F_G, F_per, F_out, T).
    pub d_input: SMatrix<f64, 6, 5>,
}

/// Time derivative of the state. The model is autonomous; `t` is accepted
/// for the usual ODE signature but unused.
pub fn rhs(_t: f64, x: &State, u: &Input, p: &ModelParameters) -> Result<SVector<f64, 6>, ModelError> {
    let dx = rhs_raw(&x.to_array(), &u.to_array(), p)?;
    Ok(SVector::from(dx))
}

/// As [`rhs`], together with the analytic Jacobians ∂f/∂x and ∂f/∂u.
pub fn rhs_with_jacobians(
    _t: f64,
    x: &State,
    u: &Input,
    p: &ModelParameters,
) -> Result<(SVector<f64, 6>, RhsJacobians), ModelError> {
    let (dx, jx, ju) = rhs_raw_with_jacobians(&x.to_array(), &u.to_array(), p)?;
    Ok((
        SVector::from(dx),
        RhsJacobians {
            d_state: SMatrix::from_fn(|i, j| jx[i][j]),
            d_input: SMatrix::from_fn(|i, j| ju[i][j]),
        },
    ))
}

pub(crate) fn rhs_raw(x: &[f64; 6], u: &[f64; 5], p: &ModelParameters) -> Result<[f64; 6], ModelError> {
    let v = x[0];
    if !(v > 0.0) {
        return Err(ModelError::NonPositiveVolume { volume: v });
    }
    let [f_w, f_g, f_per, f_out, temp] = *u;
    let c = ComponentVector([x[1] / v, x[2] / v, x[3] / v, x[4] / v, x[5] / v]);
    let k = kinetics(&c, temp, p)?;

    let mut dx = [0.0; 6];
    dx[0] = f_w + f_g - f_out - f_per;
    for i in 0..5 {
        let inflow = if i == 2 { p.c_g_in * f_g } else { 0.0 };
        dx[1 + i] = inflow - c.0[i] * f_out - PERFUSION_PASS[i] * c.0[i] * f_per + k.production.0[i] * v;
    }
    if dx.iter().any(|d| !d.is_finite()) {
        return Err(ModelError::NonFinite { quantity: "state derivative" });
    }
    Ok(dx)
}

#[allow(clippy::type_complexity)]
pub(crate) fn rhs_raw_with_jacobians(
    x: &[f64; 6],
    u: &[f64; 5],
    p: &ModelParameters,
) -> Result<([f64; 6], [[f64; 6]; 6], [[f64; 5]; 6]), ModelError> {
    let v = x[0];
    if !(v > 0.0) {
        return Err(ModelError::NonPositiveVolume { volume: v });
    }
    let [_f_w, f_g, f_per, f_out, temp] = *u;
    let c = ComponentVector([x[1] / v, x[2] / v, x[3] / v, x[4] / v, x[5] / v]);
    let (k, kd) = kinetics_with_derivatives(&c, temp, p)?;

    let s = Stoichiometry::new(p);
    // ∂R/∂c = Sᵀ ∂r/∂c (5×5) and ∂R/∂T = Sᵀ ∂r/∂T (5).
    let mut dr_dc = [[0.0; 5]; 5];
    let mut dr_dt = [0.0; 5];
    for reac in 0..6 {
        let srow = &s.matrix()[reac];
        for comp in 0..5 {
            let coeff = srow[comp];
            if coeff == 0.0 {
                continue;
            }
            for j in 0..5 {
                dr_dc[comp][j] += coeff * kd.d_conc[reac][j];
            }
            dr_dt[comp] += coeff * kd.d_temp[reac];
        }
    }

    let mut dx = [0.0; 6];
    dx[0] = u[0] + f_g - f_out - f_per;
    for i in 0..5 {
        let inflow = if i == 2 { p.c_g_in * f_g } else { 0.0 };
        dx[1 + i] = inflow - c.0[i] * f_out - PERFUSION_PASS[i] * c.0[i] * f_per + k.production.0[i] * v;
    }
    if dx.iter().any(|d| !d.is_finite()) {
        return Err(ModelError::NonFinite { quantity: "state derivative" });
    }

    let mut jx = [[0.0; 6]; 6];
    let mut ju = [[0.0; 5]; 6];

    // Volume row: f₀ = F_W + F_G - F_out - F_per, independent of the state.
    ju[0] = [1.0, 1.0, -1.0, -1.0, 0.0];

    for i in 0..5 {
        let row = 1 + i;
        let removal = f_out + PERFUSION_PASS[i] * f_per;
        // ∂f/∂V: concentration terms re-derived via ∂c_j/∂V = -c_j/V.
        let mut dv = (c.0[i] / v) * removal + k.production.0[i];
        for j in 0..5 {
            dv -= dr_dc[i][j] * c.0[j];
        }
        jx[row][0] = dv;
        for j in 0..5 {
            jx[row][1 + j] = dr_dc[i][j] - if i == j { removal / v } else { 0.0 };
        }
        ju[row][1] = if i == 2 { p.c_g_in } else { 0.0 };
        ju[row][2] = -PERFUSION_PASS[i] * c.0[i];
        ju[row][3] = -c.0[i];
        ju[row][4] = v * dr_dt[i];
    }

    Ok((dx, jx, ju))
}

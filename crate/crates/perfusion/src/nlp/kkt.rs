//! First-order optimality diagnostics.

use super::problem::{add_jac_t_vec, EvalError, NlpProblem};

/// Lagrange multiplier estimates for the functional constraints. Bound
/// multipliers are implicit: stationarity is measured through the projected
/// gradient, which absorbs them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Multipliers {
    /// Equality multipliers λ.
    pub eq: Vec<f64>,
    /// Inequality multipliers μ ≥ 0.
    pub ineq: Vec<f64>,
}

/// Scaled KKT residuals at a point; each norm is divided by
/// `max(1, ‖∇f‖∞)` so tolerances mean the same thing across objective
/// scalings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual {
    /// ‖P(z - ∇L) - z‖∞, the projected gradient of the Lagrangian.
    pub stationarity: f64,
    /// max(‖c_E‖∞, ‖min(c_I, 0)‖∞).
    pub feasibility: f64,
    /// max |μᵢ c_Iᵢ|.
    pub complementarity: f64,
}

impl KktResidual {
    pub fn within(&self, kkt_tol: f64, feasibility_tol: f64) -> bool {
        self.stationarity <= kkt_tol
            && self.feasibility <= feasibility_tol
            && self.complementarity <= kkt_tol
    }
}

/// Evaluates the scaled KKT residuals of `problem` at `z` with the given
/// multiplier estimates.
pub fn kkt_residual<P: NlpProblem + ?Sized>(
    problem: &P,
    z: &[f64],
    multipliers: &Multipliers,
) -> Result<KktResidual, EvalError> {
    let n = problem.num_vars();
    assert_eq!(z.len(), n, "point dimension");
    assert_eq!(multipliers.eq.len(), problem.num_eq(), "equality multiplier dimension");
    assert_eq!(multipliers.ineq.len(), problem.num_ineq(), "inequality multiplier dimension");
    let (lb, ub) = problem.bounds();

    let mut grad = vec![0.0; n];
    problem.gradient(z, &mut grad)?;
    let grad_scale = grad.iter().fold(1.0f64, |a, g| a.max(g.abs()));

    // ∇L = ∇f - J_Eᵀ λ - J_Iᵀ μ
    let mut lagrangian_grad = grad.clone();
    if problem.num_eq() > 0 {
        let structure = problem.eq_jacobian_structure();
        let mut values = vec![0.0; structure.len()];
        problem.eq_jacobian_values(z, &mut values)?;
        let neg_lambda: Vec<f64> = multipliers.eq.iter().map(|l| -l).collect();
        add_jac_t_vec(&structure, &values, &neg_lambda, &mut lagrangian_grad);
    }
    if problem.num_ineq() > 0 {
        let structure = problem.ineq_jacobian_structure();
        let mut values = vec![0.0; structure.len()];
        problem.ineq_jacobian_values(z, &mut values)?;
        let neg_mu: Vec<f64> = multipliers.ineq.iter().map(|m| -m).collect();
        add_jac_t_vec(&structure, &values, &neg_mu, &mut lagrangian_grad);
    }

    let mut stationarity = 0.0f64;
    for i in 0..n {
        let projected = (z[i] - lagrangian_grad[i]).clamp(lb[i], ub[i]);
        stationarity = stationarity.max((projected - z[i]).abs());
    }

    let mut feasibility = 0.0f64;
    if problem.num_eq() > 0 {
        let mut c = vec![0.0; problem.num_eq()];
        problem.eq_constraints(z, &mut c)?;
        for v in &c {
            feasibility = feasibility.max(v.abs());
        }
    }
    let mut complementarity = 0.0f64;
    if problem.num_ineq() > 0 {
        let mut c = vec![0.0; problem.num_ineq()];
        problem.ineq_constraints(z, &mut c)?;
        for (v, mu) in c.iter().zip(&multipliers.ineq) {
            feasibility = feasibility.max((-v).max(0.0));
            complementarity = complementarity.max((mu * v).abs());
        }
    }

    Ok(KktResidual {
        stationarity: stationarity / grad_scale,
        feasibility: feasibility / grad_scale,
        complementarity: complementarity / grad_scale,
    })
}

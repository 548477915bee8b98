//! Reference solver: an augmented-Lagrangian outer loop around
//! bound-constrained limited-memory quasi-Newton inner solves.
//!
//! Equalities and inequalities enter the merit through the classic
//! Powell-Hestenes-Rockafellar form; bounds are handled by projection in
//! the inner solver, keeping every subproblem box-constrained. Multiplier
//! updates `λ ← λ - ρ c_E`, `μ ← max(0, μ - ρ c_I)` follow each inner
//! solve, and the penalty grows only while joint infeasibility stalls.
//!
//! Any method meeting the KKT contract could sit behind [`solve`]; the
//! interface in [`super::problem`] is deliberately solver-agnostic.

use serde::{Deserialize, Serialize};

use super::kkt::{kkt_residual, KktResidual, Multipliers};
use super::problem::{add_jac_t_vec, EvalError, JacobianStructure, NlpProblem};
use super::report::{MajorIteration, SolverReport, SolverStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Tolerance on scaled stationarity and complementarity.
    pub kkt_tol: f64,
    /// Tolerance on scaled constraint violation.
    pub feasibility_tol: f64,
    /// Major (outer) iteration budget.
    pub max_major_iterations: usize,
    /// Inner iteration budget per major iteration.
    pub max_inner_iterations: usize,
    /// Limited-memory pairs kept by the inner quasi-Newton solve.
    pub lbfgs_memory: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Backtracking halvings before the line search gives up.
    pub max_backtracks: usize,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_penalty: f64,
    /// Required shrink factor of the joint violation per major iteration;
    /// the penalty grows when progress is slower.
    pub violation_shrink: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kkt_tol: 1e-6,
            feasibility_tol: 1e-6,
            max_major_iterations: 500,
            max_inner_iterations: 600,
            lbfgs_memory: 20,
            armijo_c1: 1e-4,
            max_backtracks: 40,
            initial_penalty: 1000.0,
            penalty_growth: 10.0,
            max_penalty: 1e12,
            violation_shrink: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.kkt_tol > 0.0 && self.feasibility_tol > 0.0) {
            return Err("solver tolerances must be positive".into());
        }
        if self.penalty_growth <= 1.0 {
            return Err("penalty growth factor must exceed 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolveError {
    #[error("initial point has dimension {got}, problem has {expected} variables")]
    Dimension { expected: usize, got: usize },
    #[error("problem evaluation failed at the initial point: {0}")]
    InitialEvaluation(EvalError),
    #[error("invalid solver options: {0}")]
    BadOptions(String),
    #[error("no starting points supplied")]
    NoStarts,
}

/// Solves the problem from `z0`. Non-convergence is reported through
/// [`SolverReport::status`], never by a silent success.
pub fn solve<P: NlpProblem + ?Sized>(
    problem: &P,
    z0: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolverReport), SolveError> {
    solve_with_log(problem, z0, opts, |_| {})
}

/// As [`solve`], streaming one [`MajorIteration`] record per outer
/// iteration to `on_major`.
pub fn solve_with_log<P: NlpProblem + ?Sized>(
    problem: &P,
    z0: &[f64],
    opts: &SolverOptions,
    on_major: impl FnMut(&MajorIteration),
) -> Result<(Vec<f64>, SolverReport), SolveError> {
    solve_warm_started(problem, z0, None, opts, on_major)
}

/// As [`solve_with_log`], with initial multiplier estimates. Structured
/// problems (multiple shooting in particular) converge far faster when the
/// caller seeds the duals, e.g. from a costate recursion.
pub fn solve_warm_started<P: NlpProblem + ?Sized>(
    problem: &P,
    z0: &[f64],
    multipliers0: Option<Multipliers>,
    opts: &SolverOptions,
    mut on_major: impl FnMut(&MajorIteration),
) -> Result<(Vec<f64>, SolverReport), SolveError> {
    opts.validate().map_err(SolveError::BadOptions)?;
    let n = problem.num_vars();
    if z0.len() != n {
        return Err(SolveError::Dimension { expected: n, got: z0.len() });
    }
    let (lb, ub) = problem.bounds();
    let mut z: Vec<f64> = z0.iter().zip(lb.iter().zip(&ub)).map(|(&v, (&l, &u))| v.clamp(l, u)).collect();

    let mut eval = AlWorkspace::new(problem);
    eval.refresh(&z).map_err(SolveError::InitialEvaluation)?;

    let m_eq = problem.num_eq();
    let m_ineq = problem.num_ineq();
    let mut multipliers = match multipliers0 {
        Some(m) => {
            if m.eq.len() != m_eq || m.ineq.len() != m_ineq {
                return Err(SolveError::Dimension { expected: m_eq + m_ineq, got: m.eq.len() + m.ineq.len() });
            }
            Multipliers { eq: m.eq, ineq: m.ineq.into_iter().map(|v| v.max(0.0)).collect() }
        }
        None => Multipliers { eq: vec![0.0; m_eq], ineq: vec![0.0; m_ineq] },
    };

    // Penalties ride on the larger of the objective-gradient scale and the
    // seeded multiplier scale. The former makes the iterate sequence
    // equivariant under a positive rescaling of the objective; the latter
    // matters for problems whose duals are intrinsically large (long-horizon
    // shooting chains amplify), where a penalty below the multiplier scale
    // lets the merit profit from tolerance-level constraint leakage.
    let grad_scale0 = {
        let mut g = vec![0.0; n];
        problem.gradient(&z, &mut g).map_err(SolveError::InitialEvaluation)?;
        g.iter().fold(1.0f64, |a, v| a.max(v.abs()))
    };
    let dual_scale0 = multipliers
        .eq
        .iter()
        .chain(&multipliers.ineq)
        .fold(grad_scale0, |a, v| a.max(v.abs()));
    let mut penalty = opts.initial_penalty * dual_scale0;
    let penalty_cap = opts.max_penalty * dual_scale0;
    let mut violation_prev = f64::INFINITY;

    // Inner solves stop on the projected-gradient norm relative to the local
    // objective-gradient scale, mirroring how the KKT residual is scaled.
    // They start loose and tighten as the multipliers settle; with no
    // functional constraints there is nothing to settle, so the single
    // subproblem gets the final target directly.
    let unconstrained = m_eq + m_ineq == 0;
    let inner_tol_floor = 0.3 * opts.kkt_tol;
    let mut inner_tol = if unconstrained { inner_tol_floor } else { 1e-2f64.max(inner_tol_floor) };

    let mut history = Vec::new();
    let mut inner_total = 0usize;
    let mut status = SolverStatus::MaxIterations;
    let mut residual = KktResidual { stationarity: f64::INFINITY, feasibility: f64::INFINITY, complementarity: f64::INFINITY };
    let mut stalled_majors = 0usize;
    let mut memory = InnerMemory::default();

    // The best iterate seen, by scaled residual excess over the tolerances;
    // late penalty growth must never degrade what is returned.
    let mut best: Option<(Vec<f64>, Multipliers, KktResidual, f64)> = None;
    let score = |r: &KktResidual| -> f64 {
        (r.feasibility / opts.feasibility_tol)
            .max(r.stationarity / opts.kkt_tol)
            .max(r.complementarity / opts.kkt_tol)
    };

    for major in 0..opts.max_major_iterations {
        let inner = inner_minimize(
            problem, &mut eval, &mut z, &lb, &ub, &multipliers, penalty, inner_tol, opts, &mut memory,
        );
        let inner = match inner {
            Ok(r) => r,
            Err(_) => {
                status = SolverStatus::LineSearchFailure;
                break;
            }
        };
        inner_total += inner.iterations;

        eval.refresh(&z).map_err(|_| SolveError::InitialEvaluation(EvalError::new("refresh")))?;

        let made_progress = inner.merit_final < inner.merit_initial - 1e-12 * (1.0 + inner.merit_initial.abs());
        if !inner.converged && inner.iterations > 0 && made_progress {
            // Budget exhausted mid-subproblem: continue the same subproblem
            // next major with the quasi-Newton memory intact. Multipliers,
            // penalty, and the violation baseline are only judged at
            // subproblem solutions.
            stalled_majors = 0;
            let record = MajorIteration {
                iter: major,
                objective: eval.objective,
                stationarity: f64::NAN,
                feasibility: f64::NAN,
                complementarity: f64::NAN,
                penalty,
                inner_iterations: inner.iterations,
                merit_initial: inner.merit_initial,
                merit_final: inner.merit_final,
                step_norm: 0.0,
            };
            on_major(&record);
            history.push(record);
            continue;
        }

        // Multiplier updates from the constraint values at the subproblem
        // solution. A plateaued line search means the subproblem is solved
        // to arithmetic precision even when the certificate is out of
        // reach, so the update proceeds in that case too; only a mid-solve
        // budget interrupt (handled above) defers it.
        let mut step_norm = 0.0f64;
        for i in 0..m_eq {
            let step = penalty * eval.c_eq[i];
            step_norm = step_norm.max(step.abs());
            multipliers.eq[i] -= step;
        }
        for i in 0..m_ineq {
            let updated = (multipliers.ineq[i] - penalty * eval.c_ineq[i]).max(0.0);
            step_norm = step_norm.max((updated - multipliers.ineq[i]).abs());
            multipliers.ineq[i] = updated;
        }
        memory.clear();

        // Joint violation: equality residuals plus inequality violation
        // softened by the complementarity estimate, on the same scale as
        // the reported (gradient-normalized) feasibility residual.
        let mut violation = 0.0f64;
        for c in &eval.c_eq {
            violation = violation.max(c.abs());
        }
        for (c, mu) in eval.c_ineq.iter().zip(&multipliers.ineq) {
            violation = violation.max((-c).max(-mu / penalty));
        }
        let violation = violation.max(0.0) / eval.objective_grad_scale();

        residual = kkt_residual(problem, &z, &multipliers)
            .map_err(|_| SolveError::InitialEvaluation(EvalError::new("kkt residual")))?;
        if best.as_ref().is_none_or(|(_, _, r, _)| score(&residual) < score(r)) {
            best = Some((z.clone(), multipliers.clone(), residual, eval.objective));
        }

        let record = MajorIteration {
            iter: major,
            objective: eval.objective,
            stationarity: residual.stationarity,
            feasibility: residual.feasibility,
            complementarity: residual.complementarity,
            penalty,
            inner_iterations: inner.iterations,
            merit_initial: inner.merit_initial,
            merit_final: inner.merit_final,
            step_norm,
        };
        on_major(&record);
        history.push(record);

        if residual.within(opts.kkt_tol, opts.feasibility_tol) {
            status = SolverStatus::Converged;
            break;
        }

        // Without constraints, a converged subproblem is the whole solve; if
        // the residual still misses the tolerance the arithmetic floor is
        // reached and further majors cannot help.
        if unconstrained && inner.converged {
            status = SolverStatus::LineSearchFailure;
            break;
        }

        // A subproblem that can no longer move twice in a row has hit the
        // arithmetic floor.
        if !inner.converged {
            stalled_majors += 1;
            if stalled_majors >= 2 {
                status = SolverStatus::LineSearchFailure;
                break;
            }
        } else {
            stalled_majors = 0;
        }

        if violation > opts.violation_shrink * violation_prev && violation > opts.feasibility_tol {
            if penalty >= penalty_cap {
                status = SolverStatus::Infeasible;
                break;
            }
            penalty = (penalty * opts.penalty_growth).min(penalty_cap);
        }
        violation_prev = violation;
        inner_tol = (inner_tol * 0.2).max(inner_tol_floor);
    }

    // Return the best iterate, not necessarily the last.
    let final_objective;
    match best {
        Some((bz, _bm, br, bobj)) if status != SolverStatus::Converged && score(&br) < score(&residual) => {
            z = bz;
            residual = br;
            final_objective = bobj;
        }
        _ => {
            final_objective = eval.objective;
        }
    }

    let report = SolverReport {
        status,
        major_iterations: history.len(),
        inner_iterations_total: inner_total,
        final_objective,
        stationarity: residual.stationarity,
        feasibility: residual.feasibility,
        complementarity: residual.complementarity,
        history,
    };
    Ok((z, report))
}

/// Runs [`solve`] from several starting points and returns the best result:
/// converged beats non-converged, then lower feasibility, then lower
/// objective. Acknowledges that these problems can have multiple optima.
pub fn solve_multi_start<P: NlpProblem + ?Sized>(
    problem: &P,
    starts: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolverReport), SolveError> {
    let mut best: Option<(Vec<f64>, SolverReport)> = None;
    for z0 in starts {
        let candidate = solve(problem, z0, opts)?;
        best = Some(match best.take() {
            None => candidate,
            Some(current) => {
                let better = {
                    let (a, b) = (&candidate.1, &current.1);
                    (a.converged(), b.converged()) == (true, false)
                        || (a.converged() == b.converged()
                            && (a.final_objective, a.feasibility) < (b.final_objective, b.feasibility))
                };
                if better {
                    candidate
                } else {
                    current
                }
            }
        });
    }
    best.ok_or(SolveError::NoStarts)
}

struct InnerResult {
    iterations: usize,
    converged: bool,
    merit_initial: f64,
    merit_final: f64,
}

/// Solver state carried across outer iterations while one subproblem is
/// being continued under an exhausted budget.
struct InnerMemory {
    s_list: Vec<Vec<f64>>,
    y_list: Vec<Vec<f64>>,
    rho_list: Vec<f64>,
    /// Levenberg damping of the Gauss-Newton model.
    damping: f64,
}

impl Default for InnerMemory {
    fn default() -> Self {
        InnerMemory { s_list: Vec::new(), y_list: Vec::new(), rho_list: Vec::new(), damping: 1.0 }
    }
}

impl InnerMemory {
    fn clear(&mut self) {
        self.s_list.clear();
        self.y_list.clear();
        self.rho_list.clear();
    }
}

/// Cached problem evaluation at one point plus the Jacobian triplets needed
/// for merit gradients.
struct AlWorkspace<'a, P: NlpProblem + ?Sized> {
    problem: &'a P,
    objective: f64,
    grad: Vec<f64>,
    c_eq: Vec<f64>,
    c_ineq: Vec<f64>,
    eq_structure: JacobianStructure,
    ineq_structure: JacobianStructure,
    eq_values: Vec<f64>,
    ineq_values: Vec<f64>,
}

impl<'a, P: NlpProblem + ?Sized> AlWorkspace<'a, P> {
    fn new(problem: &'a P) -> Self {
        let eq_structure = problem.eq_jacobian_structure();
        let ineq_structure = problem.ineq_jacobian_structure();
        AlWorkspace {
            problem,
            objective: f64::NAN,
            grad: vec![0.0; problem.num_vars()],
            c_eq: vec![0.0; problem.num_eq()],
            c_ineq: vec![0.0; problem.num_ineq()],
            eq_values: vec![0.0; eq_structure.len()],
            ineq_values: vec![0.0; ineq_structure.len()],
            eq_structure,
            ineq_structure,
        }
    }

    /// Values only (objective and constraints) at `z`.
    fn refresh(&mut self, z: &[f64]) -> Result<(), EvalError> {
        self.objective = self.problem.objective(z)?;
        self.problem.eq_constraints(z, &mut self.c_eq)?;
        self.problem.ineq_constraints(z, &mut self.c_ineq)?;
        Ok(())
    }

    /// Augmented-Lagrangian merit at `z` (refreshes values).
    fn merit(&mut self, z: &[f64], multipliers: &Multipliers, penalty: f64) -> Result<f64, EvalError> {
        self.refresh(z)?;
        let mut value = self.objective;
        for (c, l) in self.c_eq.iter().zip(&multipliers.eq) {
            value += -l * c + 0.5 * penalty * c * c;
        }
        for (c, mu) in self.c_ineq.iter().zip(&multipliers.ineq) {
            let shifted = (mu - penalty * c).max(0.0);
            value += (shifted * shifted - mu * mu) / (2.0 * penalty);
        }
        if !value.is_finite() {
            return Err(EvalError::new("non-finite merit"));
        }
        Ok(value)
    }

    /// `max(1, ‖∇f‖∞)` at the last `merit_grad` point.
    fn objective_grad_scale(&self) -> f64 {
        self.grad.iter().fold(1.0f64, |a, g| a.max(g.abs()))
    }

    /// Gauss-Newton merit-Hessian product `out = ρ Jᵀ(J v)` over the
    /// equality Jacobian plus the active rows of the inequality Jacobian,
    /// using the values cached by the last `merit_grad` call. `tmp_eq` and
    /// `tmp_ineq` are scratch of sizes num_eq / num_ineq.
    fn gauss_newton_product(
        &self,
        penalty: f64,
        ineq_active: &[bool],
        v: &[f64],
        tmp_eq: &mut [f64],
        tmp_ineq: &mut [f64],
        out: &mut [f64],
    ) {
        out.fill(0.0);
        if !tmp_eq.is_empty() {
            tmp_eq.fill(0.0);
            for ((&r, &c), &jv) in self.eq_structure.rows.iter().zip(&self.eq_structure.cols).zip(&self.eq_values) {
                tmp_eq[r] += jv * v[c];
            }
            for ((&r, &c), &jv) in self.eq_structure.rows.iter().zip(&self.eq_structure.cols).zip(&self.eq_values) {
                out[c] += penalty * jv * tmp_eq[r];
            }
        }
        if !tmp_ineq.is_empty() {
            tmp_ineq.fill(0.0);
            for ((&r, &c), &jv) in self.ineq_structure.rows.iter().zip(&self.ineq_structure.cols).zip(&self.ineq_values) {
                if ineq_active[r] {
                    tmp_ineq[r] += jv * v[c];
                }
            }
            for ((&r, &c), &jv) in self.ineq_structure.rows.iter().zip(&self.ineq_structure.cols).zip(&self.ineq_values) {
                if ineq_active[r] {
                    out[c] += penalty * jv * tmp_ineq[r];
                }
            }
        }
    }

    /// Inequality rows currently inside the quadratic branch of the
    /// shifted-penalty term.
    fn ineq_activity(&self, multipliers: &Multipliers, penalty: f64, out: &mut [bool]) {
        for ((o, c), mu) in out.iter_mut().zip(&self.c_ineq).zip(&multipliers.ineq) {
            *o = mu - penalty * c > 0.0;
        }
    }

    /// Merit gradient at `z`; assumes `refresh(z)` state is current.
    fn merit_grad(&mut self, z: &[f64], multipliers: &Multipliers, penalty: f64, out: &mut [f64]) -> Result<(), EvalError> {
        self.problem.gradient(z, &mut self.grad)?;
        out.copy_from_slice(&self.grad);
        if !self.c_eq.is_empty() {
            self.problem.eq_jacobian_values(z, &mut self.eq_values)?;
            let w: Vec<f64> = self
                .c_eq
                .iter()
                .zip(&multipliers.eq)
                .map(|(c, l)| penalty * c - l)
                .collect();
            add_jac_t_vec(&self.eq_structure, &self.eq_values, &w, out);
        }
        if !self.c_ineq.is_empty() {
            self.problem.ineq_jacobian_values(z, &mut self.ineq_values)?;
            let w: Vec<f64> = self
                .c_ineq
                .iter()
                .zip(&multipliers.ineq)
                .map(|(c, mu)| -(mu - penalty * c).max(0.0))
                .collect();
            add_jac_t_vec(&self.ineq_structure, &self.ineq_values, &w, out);
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::new("non-finite merit gradient"));
        }
        Ok(())
    }
}

/// Projected limited-memory BFGS with backtracking Armijo on the projected
/// path. Accepted merit values are non-increasing by construction. `tol_rel`
/// is measured against `max(1, ‖∇f‖∞)` at the current iterate, matching the
/// scaling of the reported KKT residuals. `memory` persists across calls so
/// a budget-limited subproblem can be continued where it stopped.
#[allow(clippy::too_many_arguments)]
fn inner_minimize<P: NlpProblem + ?Sized>(
    problem: &P,
    eval: &mut AlWorkspace<'_, P>,
    z: &mut Vec<f64>,
    lb: &[f64],
    ub: &[f64],
    multipliers: &Multipliers,
    penalty: f64,
    tol_rel: f64,
    opts: &SolverOptions,
    memory: &mut InnerMemory,
) -> Result<InnerResult, EvalError> {
    let _ = problem;
    let n = z.len();
    let project = |v: &mut [f64]| {
        for i in 0..v.len() {
            v[i] = v[i].clamp(lb[i], ub[i]);
        }
    };
    project(z);

    let mut merit = eval.merit(z, multipliers, penalty)?;
    let merit_initial = merit;
    let mut grad = vec![0.0; n];
    eval.merit_grad(z, multipliers, penalty, &mut grad)?;

    let constrained = eval.problem.num_eq() + eval.problem.num_ineq() > 0;
    let mut tmp_eq = vec![0.0; eval.problem.num_eq()];
    let mut tmp_ineq = vec![0.0; eval.problem.num_ineq()];
    let mut ineq_active = vec![false; eval.problem.num_ineq()];

    let mut converged = false;
    let mut iterations = 0;

    for _iter in 0..opts.max_inner_iterations {
        // Projected-gradient optimality measure against the local scale.
        let mut pg = 0.0f64;
        for i in 0..n {
            let step = (z[i] - grad[i]).clamp(lb[i], ub[i]) - z[i];
            pg = pg.max(step.abs());
        }
        if pg <= tol_rel * eval.objective_grad_scale() {
            converged = true;
            break;
        }
        iterations += 1;

        // Two-loop L-BFGS recursion for d = -H g. For constrained problems
        // the base metric H₀ is the inverse of the damped Gauss-Newton
        // penalty Hessian σI + ρ JᵀJ, applied through a short conjugate-
        // gradient solve on the Jacobian triplets: the penalty part of the
        // curvature is then exact at any penalty, and the quasi-Newton
        // pairs only have to learn the (mild) Lagrangian curvature that
        // lives in the null space of the constraints.
        eval.ineq_activity(multipliers, penalty, &mut ineq_active);
        let free: Vec<bool> = (0..n)
            .map(|i| {
                !((z[i] - lb[i] <= 1e-12 && grad[i] > 0.0) || (ub[i] - z[i] <= 1e-12 && grad[i] < 0.0))
            })
            .collect();
        let sigma = memory.damping;
        let apply_h0 = |v: &[f64], out: &mut Vec<f64>, tmp_eq: &mut [f64], tmp_ineq: &mut [f64]| {
            if !constrained {
                out.copy_from_slice(v);
                return;
            }
            // CG on (σI + ρJᵀJ) x = v restricted to the free variables.
            out.fill(0.0);
            let mut r: Vec<f64> = v.iter().zip(&free).map(|(g, &f)| if f { *g } else { 0.0 }).collect();
            let rhs_norm = norm2(&r);
            if rhs_norm == 0.0 {
                return;
            }
            let mut p_dir = r.clone();
            let mut hv = vec![0.0; v.len()];
            let mut rr = dot(&r, &r);
            let target = (0.1 * rhs_norm).max(1e-14);
            for _cg in 0..60 {
                if rr.sqrt() <= target {
                    break;
                }
                let p_masked: Vec<f64> = p_dir.iter().zip(&free).map(|(w, &f)| if f { *w } else { 0.0 }).collect();
                eval.gauss_newton_product(penalty, &ineq_active, &p_masked, tmp_eq, tmp_ineq, &mut hv);
                for i in 0..v.len() {
                    hv[i] = if free[i] { sigma * p_masked[i] + hv[i] } else { 0.0 };
                }
                let php = dot(&p_masked, &hv);
                if php <= 0.0 {
                    break;
                }
                let alpha_cg = rr / php;
                axpy(alpha_cg, &p_masked, out);
                axpy(-alpha_cg, &hv, &mut r);
                let rr_new = dot(&r, &r);
                let beta = rr_new / rr;
                rr = rr_new;
                for i in 0..v.len() {
                    p_dir[i] = r[i] + beta * p_dir[i];
                }
            }
        };

        let s_list = &mut memory.s_list;
        let y_list = &mut memory.y_list;
        let rho_list = &mut memory.rho_list;
        let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = vec![0.0; s_list.len()];
        for idx in (0..s_list.len()).rev() {
            let a = rho_list[idx] * dot(&s_list[idx], &d);
            alphas[idx] = a;
            axpy(-a, &y_list[idx], &mut d);
        }
        let mut h0d = vec![0.0; n];
        apply_h0(&d, &mut h0d, &mut tmp_eq, &mut tmp_ineq);
        if !constrained && !s_list.is_empty() {
            let last = s_list.len() - 1;
            let gamma = dot(&s_list[last], &y_list[last]) / dot(&y_list[last], &y_list[last]);
            for v in h0d.iter_mut() {
                *v *= gamma;
            }
        }
        d = h0d;
        for idx in 0..s_list.len() {
            let b = rho_list[idx] * dot(&y_list[idx], &d);
            axpy(alphas[idx] - b, &s_list[idx], &mut d);
        }
        let descent = dot(&grad, &d);
        if !(descent < 0.0) {
            memory.clear();
            d = grad.iter().map(|g| -g).collect();
            if constrained {
                let mut h0g = vec![0.0; n];
                apply_h0(&d, &mut h0g, &mut tmp_eq, &mut tmp_ineq);
                d = h0g;
            }
        }

        // Backtracking Armijo along the projected path.
        let mut alpha = 1.0f64;
        let mut accepted = false;
        let mut z_new = vec![0.0; n];
        let mut merit_new = merit;
        for _bt in 0..=opts.max_backtracks {
            for i in 0..n {
                z_new[i] = (z[i] + alpha * d[i]).clamp(lb[i], ub[i]);
            }
            let dz_dot_g: f64 = (0..n).map(|i| (z_new[i] - z[i]) * grad[i]).sum();
            if dz_dot_g >= 0.0 {
                // Projection annihilated the descent direction at this step size.
                alpha *= 0.5;
                continue;
            }
            // Sufficient decrease, widened by the f64 resolution of the
            // merit itself so the end-game can keep polishing the iterate
            // when true decreases fall below one ulp.
            let threshold = merit + opts.armijo_c1 * dz_dot_g + 4.0 * f64::EPSILON * merit.abs();
            match eval.merit(&z_new, multipliers, penalty) {
                Ok(m) if m <= threshold => {
                    merit_new = m;
                    accepted = true;
                    break;
                }
                _ => alpha *= 0.5,
            }
        }
        if !accepted {
            if constrained && memory.damping < 1e12 {
                // Stiffen the Gauss-Newton model and try again next call.
                memory.damping *= 16.0;
                return Ok(InnerResult { iterations, converged: false, merit_initial, merit_final: merit });
            }
            // No progress possible along this direction at machine-scale steps.
            return Ok(InnerResult { iterations, converged: false, merit_initial, merit_final: merit });
        }

        if constrained {
            // Trust-region-flavored damping update from the step quality.
            if alpha >= 1.0 {
                memory.damping = (memory.damping * 0.33).max(1e-10);
            } else if alpha < 0.25 {
                memory.damping = (memory.damping * 4.0).min(1e12);
            }
        }

        let mut grad_new = vec![0.0; n];
        eval.merit_grad(&z_new, multipliers, penalty, &mut grad_new)?;

        {
            let s_list = &mut memory.s_list;
            let y_list = &mut memory.y_list;
            let rho_list = &mut memory.rho_list;
            let s: Vec<f64> = (0..n).map(|i| z_new[i] - z[i]).collect();
            let y: Vec<f64> = (0..n).map(|i| grad_new[i] - grad[i]).collect();
            let sy = dot(&s, &y);
            if sy > 1e-10 * norm2(&s) * norm2(&y) {
                if s_list.len() == opts.lbfgs_memory {
                    s_list.remove(0);
                    y_list.remove(0);
                    rho_list.remove(0);
                }
                rho_list.push(1.0 / sy);
                s_list.push(s);
                y_list.push(y);
            }
        }

        *z = z_new;
        grad = grad_new;
        merit = merit_new;
    }

    Ok(InnerResult { iterations, converged, merit_initial, merit_final: merit })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

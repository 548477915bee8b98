use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverStatus {
    /// All KKT residuals are below their tolerances.
    Converged,
    /// Major-iteration budget exhausted before convergence.
    MaxIterations,
    /// The inner line search could not make progress.
    LineSearchFailure,
    /// The penalty saturated while constraint violation stagnated.
    Infeasible,
}

/// One structured record per major (outer) iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorIteration {
    pub iter: usize,
    pub objective: f64,
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
    pub penalty: f64,
    /// Iterations spent by the inner bound-constrained solve.
    pub inner_iterations: usize,
    /// Augmented-Lagrangian merit at the start and end of the inner solve;
    /// the inner line search only ever accepts non-increasing values.
    pub merit_initial: f64,
    pub merit_final: f64,
    /// Infinity norm of the multiplier update step.
    pub step_norm: f64,
}

/// Outcome of a solve. `converged` implies every residual is within its
/// tolerance; anything else is reported honestly in `status`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub major_iterations: usize,
    pub inner_iterations_total: usize,
    pub final_objective: f64,
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
    pub history: Vec<MajorIteration>,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.status == SolverStatus::Converged
    }
}

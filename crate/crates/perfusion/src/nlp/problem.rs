use std::fmt;

/// Failure inside a problem callback (e.g. an integration that could not be
/// completed at the queried point). The solver treats a failing candidate
/// point as infinitely bad rather than aborting, so transient failures only
/// shorten a line-search step.
#[derive(Debug, Clone)]
pub struct EvalError(pub String);

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "evaluation failed: {}", self.0)
    }
}

impl std::error::Error for EvalError {}

impl EvalError {
    pub fn new(msg: impl Into<String>) -> Self {
        EvalError(msg.into())
    }
}

/// Sparsity pattern of a constraint Jacobian in triplet form; `rows[k]`,
/// `cols[k]` locate `values[k]` of the corresponding value call. The
/// pattern is fixed per problem instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JacobianStructure {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl JacobianStructure {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A smooth constrained program
///
/// ```text
/// minimize  f(z)
/// s.t.      lb ≤ z ≤ ub
///           c_E(z) = 0
///           c_I(z) ≥ 0
/// ```
///
/// Evaluators must be reentrant: the solver may call them from multiple
/// threads on distinct points, and implementations are free to parallelize
/// internally as long as results stay deterministic.
pub trait NlpProblem: Sync {
    fn num_vars(&self) -> usize;
    fn num_eq(&self) -> usize;
    fn num_ineq(&self) -> usize {
        0
    }

    /// Variable bounds; use `f64::NEG_INFINITY` / `f64::INFINITY` for free
    /// variables.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);

    fn objective(&self, z: &[f64]) -> Result<f64, EvalError>;

    fn gradient(&self, z: &[f64], grad: &mut [f64]) -> Result<(), EvalError>;

    fn eq_constraints(&self, _z: &[f64], _out: &mut [f64]) -> Result<(), EvalError> {
        Ok(())
    }

    fn eq_jacobian_structure(&self) -> JacobianStructure {
        JacobianStructure::default()
    }

    fn eq_jacobian_values(&self, _z: &[f64], _values: &mut [f64]) -> Result<(), EvalError> {
        Ok(())
    }

    fn ineq_constraints(&self, _z: &[f64], _out: &mut [f64]) -> Result<(), EvalError> {
        Ok(())
    }

    fn ineq_jacobian_structure(&self) -> JacobianStructure {
        JacobianStructure::default()
    }

    fn ineq_jacobian_values(&self, _z: &[f64], _values: &mut [f64]) -> Result<(), EvalError> {
        Ok(())
    }
}

/// `out += Jᵀ v` for a triplet Jacobian.
pub(crate) fn add_jac_t_vec(structure: &JacobianStructure, values: &[f64], v: &[f64], out: &mut [f64]) {
    for ((&r, &c), &val) in structure.rows.iter().zip(&structure.cols).zip(values) {
        out[c] += val * v[r];
    }
}

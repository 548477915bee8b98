//! Small reference problems with known solutions. The test suite drives the
//! solver through them; they are also handy for sanity-checking option
//! changes.

use super::problem::{EvalError, JacobianStructure, NlpProblem};

/// `min (z₀-1)² + (z₁+2)²`, minimizer (1, -2). No constraints.
pub struct UnconstrainedQuadratic;

impl NlpProblem for UnconstrainedQuadratic {
    fn num_vars(&self) -> usize {
        2
    }
    fn num_eq(&self) -> usize {
        0
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY; 2])
    }
    fn objective(&self, z: &[f64]) -> Result<f64, EvalError> {
        Ok((z[0] - 1.0).powi(2) + (z[1] + 2.0).powi(2))
    }
    fn gradient(&self, z: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        grad[0] = 2.0 * (z[0] - 1.0);
        grad[1] = 2.0 * (z[1] + 2.0);
        Ok(())
    }
}

/// `min (z₀-1)² + (z₁-1)²  s.t.  z₀ + z₁ = 0`; minimizer (0, 0) with
/// equality multiplier λ = -2.
pub struct EqualityQuadratic;

impl NlpProblem for EqualityQuadratic {
    fn num_vars(&self) -> usize {
        2
    }
    fn num_eq(&self) -> usize {
        1
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY; 2])
    }
    fn objective(&self, z: &[f64]) -> Result<f64, EvalError> {
        Ok((z[0] - 1.0).powi(2) + (z[1] - 1.0).powi(2))
    }
    fn gradient(&self, z: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        grad[0] = 2.0 * (z[0] - 1.0);
        grad[1] = 2.0 * (z[1] - 1.0);
        Ok(())
    }
    fn eq_constraints(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        out[0] = z[0] + z[1];
        Ok(())
    }
    fn eq_jacobian_structure(&self) -> JacobianStructure {
        JacobianStructure { rows: vec![0, 0], cols: vec![0, 1] }
    }
    fn eq_jacobian_values(&self, _z: &[f64], values: &mut [f64]) -> Result<(), EvalError> {
        values[0] = 1.0;
        values[1] = 1.0;
        Ok(())
    }
}

/// `min (z-1)²  s.t.  z ≥ 2`; minimizer z* = 2 with the lower bound active
/// and implied bound multiplier 2.
pub struct BoundQuadratic;

impl NlpProblem for BoundQuadratic {
    fn num_vars(&self) -> usize {
        1
    }
    fn num_eq(&self) -> usize {
        0
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![2.0], vec![f64::INFINITY])
    }
    fn objective(&self, z: &[f64]) -> Result<f64, EvalError> {
        Ok((z[0] - 1.0).powi(2))
    }
    fn gradient(&self, z: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        grad[0] = 2.0 * (z[0] - 1.0);
        Ok(())
    }
}

/// The Rosenbrock valley `min 100 (z₁ - z₀²)² + (1 - z₀)²` boxed to
/// [-5, 5]²; global minimum (1, 1) with value 0.
pub struct BoxedRosenbrock;

impl NlpProblem for BoxedRosenbrock {
    fn num_vars(&self) -> usize {
        2
    }
    fn num_eq(&self) -> usize {
        0
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![-5.0; 2], vec![5.0; 2])
    }
    fn objective(&self, z: &[f64]) -> Result<f64, EvalError> {
        Ok(100.0 * (z[1] - z[0] * z[0]).powi(2) + (1.0 - z[0]).powi(2))
    }
    fn gradient(&self, z: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        let t = z[1] - z[0] * z[0];
        grad[0] = -400.0 * t * z[0] - 2.0 * (1.0 - z[0]);
        grad[1] = 200.0 * t;
        Ok(())
    }
}

/// `min (z₀-2)² + (z₁-2)²  s.t.  1 - z₀² - z₁² ≥ 0`; minimizer on the unit
/// circle at (√2/2, √2/2) with inequality multiplier √2·2/2... computed in
/// the tests from stationarity: μ* = (2 - √2/2)/(√2/2).
pub struct DiskConstrainedQuadratic;

impl NlpProblem for DiskConstrainedQuadratic {
    fn num_vars(&self) -> usize {
        2
    }
    fn num_eq(&self) -> usize {
        0
    }
    fn num_ineq(&self) -> usize {
        1
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY; 2])
    }
    fn objective(&self, z: &[f64]) -> Result<f64, EvalError> {
        Ok((z[0] - 2.0).powi(2) + (z[1] - 2.0).powi(2))
    }
    fn gradient(&self, z: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        grad[0] = 2.0 * (z[0] - 2.0);
        grad[1] = 2.0 * (z[1] - 2.0);
        Ok(())
    }
    fn ineq_constraints(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        out[0] = 1.0 - z[0] * z[0] - z[1] * z[1];
        Ok(())
    }
    fn ineq_jacobian_structure(&self) -> JacobianStructure {
        JacobianStructure { rows: vec![0, 0], cols: vec![0, 1] }
    }
    fn ineq_jacobian_values(&self, z: &[f64], values: &mut [f64]) -> Result<(), EvalError> {
        values[0] = -2.0 * z[0];
        values[1] = -2.0 * z[1];
        Ok(())
    }
}

/// A dense equality-constrained quadratic program
/// `min ½ zᵀQz - bᵀz  s.t.  Az = c` with deterministic pseudo-random data;
/// its exact solution is the KKT linear system, solvable independently.
pub struct EqualityQp {
    pub q: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    n: usize,
    m: usize,
}

impl EqualityQp {
    /// `n` variables, `m` equality constraints, reproducible from `seed`.
    pub fn generate(n: usize, m: usize, seed: u64) -> Self {
        let mut state = seed.max(1);
        let mut next = move || {
            // xorshift64*; plenty for test-data purposes.
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut mat = vec![vec![0.0; n]; n];
        for row in mat.iter_mut() {
            for v in row.iter_mut() {
                *v = next();
            }
        }
        // Q = MᵀM/n + I is symmetric positive definite.
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for row in &mat {
                    acc += row[i] * row[j];
                }
                q[i][j] = acc / n as f64 + if i == j { 1.0 } else { 0.0 };
            }
        }
        let b: Vec<f64> = (0..n).map(|_| next()).collect();
        let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| next()).collect()).collect();
        let z_feasible: Vec<f64> = (0..n).map(|_| next()).collect();
        let c: Vec<f64> = a.iter().map(|row| dot(row, &z_feasible)).collect();
        EqualityQp { q, b, a, c, n, m }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl NlpProblem for EqualityQp {
    fn num_vars(&self) -> usize {
        self.n
    }
    fn num_eq(&self) -> usize {
        self.m
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY; self.n], vec![f64::INFINITY; self.n])
    }
    fn objective(&self, z: &[f64]) -> Result<f64, EvalError> {
        let mut value = 0.0;
        for i in 0..self.n {
            value += -self.b[i] * z[i];
            for j in 0..self.n {
                value += 0.5 * z[i] * self.q[i][j] * z[j];
            }
        }
        Ok(value)
    }
    fn gradient(&self, z: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        for i in 0..self.n {
            grad[i] = dot(&self.q[i], z) - self.b[i];
        }
        Ok(())
    }
    fn eq_constraints(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        for (o, row) in out.iter_mut().zip(&self.a) {
            *o = dot(row, z);
        }
        for (o, c) in out.iter_mut().zip(&self.c) {
            *o -= c;
        }
        Ok(())
    }
    fn eq_jacobian_structure(&self) -> JacobianStructure {
        let mut rows = Vec::with_capacity(self.m * self.n);
        let mut cols = Vec::with_capacity(self.m * self.n);
        for i in 0..self.m {
            for j in 0..self.n {
                rows.push(i);
                cols.push(j);
            }
        }
        JacobianStructure { rows, cols }
    }
    fn eq_jacobian_values(&self, _z: &[f64], values: &mut [f64]) -> Result<(), EvalError> {
        for (slot, v) in values.iter_mut().zip(self.a.iter().flatten()) {
            *slot = *v;
        }
        Ok(())
    }
}

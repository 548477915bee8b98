//! Dormand-Prince 5(4) embedded pair: shared stage core and the adaptive
//! step-size driver.

use crate::model::ModelError;

use super::{IntegrateError, IntegratorOptions};

// Butcher tableau (Dormand & Prince 1980, RK5(4)7M; FSAL).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order solution weights (row 7 of A: the method is FSAL).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
// Embedded 4th-order weights for the error estimate.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub(crate) const METHOD_ORDER: usize = 5;

/// One 5th-order step of size `h` from `(t, y)`, writing the solution into
/// `y_new` and the embedded error estimate into `err`.
///
/// `k[0]` must hold f(t, y) on entry; on success `k[6]` holds f(t+h, y_new)
/// (FSAL), ready to be reused as the next step's first stage.
pub(crate) fn step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    h: f64,
    k: &mut [Vec<f64>; 7],
    scratch: &mut [f64],
    y_new: &mut [f64],
    err: &mut [f64],
) -> Result<(), ModelError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), ModelError>,
{
    let n = y.len();
    for stage in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    acc += a * kj[i];
                }
            }
            scratch[i] = y[i] + h * acc;
        }
        let (head, tail) = k.split_at_mut(stage);
        let _ = head;
        f(t + C[stage] * h, scratch, &mut tail[0])?;
    }
    for i in 0..n {
        let mut acc5 = 0.0;
        let mut acc_err = 0.0;
        for (j, kj) in k.iter().enumerate() {
            acc5 += B5[j] * kj[i];
            acc_err += (B5[j] - B4[j]) * kj[i];
        }
        y_new[i] = y[i] + h * acc5;
        err[i] = h * acc_err;
    }
    Ok(())
}

/// Adaptive integration of `y' = f(t, y)` from `t0` to `t_end`.
///
/// The error norm is taken over the first `n_controlled` components only;
/// trailing components (e.g. appended sensitivity equations) ride along on
/// the step sequence chosen for the leading block, so augmenting a system
/// does not perturb the nominal solution.
pub(crate) fn integrate_adaptive<F>(
    f: &mut F,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    n_controlled: usize,
    opts: &IntegratorOptions,
) -> Result<Vec<f64>, IntegrateError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), ModelError>,
{
    let n = y0.len();
    let span = t_end - t0;
    if !(span >= 0.0) {
        return Err(IntegrateError::BadInterval { t0, t_end });
    }
    let mut y = y0.to_vec();
    if span == 0.0 {
        return Ok(y);
    }

    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut scratch = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];

    let mut t = t0;
    f(t, &y, &mut k[0]).map_err(|source| IntegrateError::Model { t, source })?;

    // Start with the whole span: the model's rates are slow enough that one
    // step usually passes the error test, and a rejection only costs one
    // stage sweep.
    let mut h = opts.initial_step.unwrap_or(span).min(span).max(span * 1e-10);
    let mut steps = 0usize;

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(IntegrateError::StepBudgetExhausted { t, max_steps: opts.max_steps });
        }
        steps += 1;
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(IntegrateError::StepSizeUnderflow { t });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        match step(f, t, &y, h, &mut k, &mut scratch, &mut y_new, &mut err) {
            Ok(()) => {}
            Err(_) if h > 2.0 * h_min => {
                // A rejected model evaluation (e.g. a V ≤ 0 probe) is treated
                // as a failed step: retry smaller.
                h *= 0.25;
                continue;
            }
            Err(source) => return Err(IntegrateError::Model { t, source }),
        }

        // Hairer-style weighted RMS error over the controlled block.
        let mut err_norm = 0.0f64;
        for i in 0..n_controlled {
            let tol = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            let e = err[i] / tol;
            err_norm += e * e;
        }
        err_norm = (err_norm / n_controlled as f64).sqrt();

        if err_norm <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6); // FSAL
            let factor = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-1.0 / METHOD_ORDER as f64)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else if err_norm.is_finite() {
            h *= (0.9 * err_norm.powf(-1.0 / METHOD_ORDER as f64)).clamp(0.1, 0.9);
        } else {
            h *= 0.25;
        }
    }
    Ok(y)
}

/// Fixed-step drive of the same 5th-order scheme, mainly useful as a
/// reference for convergence studies.
pub(crate) fn integrate_fixed_steps<F>(
    f: &mut F,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    n_steps: usize,
) -> Result<Vec<f64>, IntegrateError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), ModelError>,
{
    let n = y0.len();
    if !(t_end - t0 >= 0.0) {
        return Err(IntegrateError::BadInterval { t0, t_end });
    }
    let mut y = y0.to_vec();
    if t_end == t0 || n_steps == 0 {
        return Ok(y);
    }
    let h = (t_end - t0) / n_steps as f64;
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut scratch = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut t = t0;
    f(t, &y, &mut k[0]).map_err(|source| IntegrateError::Model { t, source })?;
    for i in 0..n_steps {
        // Recompute the endpoint exactly to avoid drift in t.
        let t_next = if i + 1 == n_steps { t_end } else { t0 + (i + 1) as f64 * h };
        step(f, t, &y, t_next - t, &mut k, &mut scratch, &mut y_new, &mut err)
            .map_err(|source| IntegrateError::Model { t, source })?;
        std::mem::swap(&mut y, &mut y_new);
        k.swap(0, 6);
        t = t_next;
    }
    Ok(y)
}

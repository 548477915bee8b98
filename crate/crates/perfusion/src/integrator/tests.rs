use approx::assert_relative_eq;
use nalgebra::SMatrix;

use crate::model::{ComponentVector, Input, ModelParameters, State};

use super::*;

fn base_state() -> State {
    State::new(5.65, ComponentVector::new(3.955, 0.0, 34.18, 0.678, 0.0))
}

fn params() -> ModelParameters {
    ModelParameters::default()
}

#[test]
fn batch_volume_untouched() {
    let x = integrate(
        &base_state(),
        &Input::batch(310.15),
        0.0,
        30.0,
        &params(),
        &IntegratorOptions::default(),
    )
    .unwrap();
    assert_eq!(x.volume, 5.65);
}

#[test]
fn volume_is_exactly_affine_under_zoh() {
    // Bolus-scale inflow: V = 5.650 + 0.018·30 = 6.190 L.
    let u = Input::new(2.7692e-4, 0.018 - 2.7692e-4, 0.0, 0.0, 310.15);
    let opts = IntegratorOptions { rel_tol: 1e-4, abs_tol: 1e-6, ..Default::default() };
    let x = integrate(&base_state(), &u, 0.0, 30.0, &params(), &opts).unwrap();
    let analytic = 5.65 + (u.f_water + u.f_glucose) * 30.0;
    assert!((x.volume - analytic).abs() < 1e-9, "V = {} vs {}", x.volume, analytic);
    assert!((x.volume - 6.19).abs() < 1e-9);
}

#[test]
fn one_day_batch_matches_fine_fixed_step_reference() {
    // Reference: the same scheme at a uniform step 1000x finer than the
    // average adaptive step.
    let p = params();
    let opts = IntegratorOptions::default();
    let x_adaptive = integrate(&base_state(), &Input::batch(310.15), 0.0, 1440.0, &p, &opts).unwrap();

    // The adaptive run takes few steps on this smooth problem; use a dense
    // fixed-step reference (step ≈ 1440/96000 = 0.015 min).
    let x_ref = integrate_fixed(&base_state(), &Input::batch(310.15), 0.0, 1440.0, 96_000, &p).unwrap();

    let xa = x_adaptive.to_array();
    let xr = x_ref.to_array();
    for i in 0..6 {
        let denom = xr[i].abs().max(1e-8);
        let rel = (xa[i] - xr[i]).abs() / denom;
        assert!(rel <= 10.0 * opts.rel_tol, "component {i}: rel err {rel}");
    }
}

#[test]
fn zero_length_interval_is_identity() {
    let r = integrate_with_sensitivities(
        &base_state(),
        &Input::batch(310.15),
        5.0,
        5.0,
        &params(),
        &IntegratorOptions::default(),
    )
    .unwrap();
    assert_eq!(r.x_end, base_state());
    assert_eq!(r.state_sensitivity, SMatrix::<f64, 6, 6>::identity());
    assert_eq!(r.input_sensitivity, SMatrix::<f64, 6, 5>::zeros());
}

#[test]
fn sensitivities_share_the_nominal_solution() {
    let p = params();
    let opts = IntegratorOptions::default();
    let u = Input::new(1e-3, 4e-4, 1.5e-3, 0.0, 309.5);
    let plain = integrate(&base_state(), &u, 0.0, 30.0, &p, &opts).unwrap();
    let with_sens = integrate_with_sensitivities(&base_state(), &u, 0.0, 30.0, &p, &opts).unwrap();
    // Same step sequence, bit-identical end state.
    assert_eq!(plain, with_sens.x_end);
}

#[test]
fn sensitivities_match_central_finite_differences() {
    let p = params();
    // Tight tolerances so ride-along discretization error on the sensitivity
    // block stays below the 1e-4 comparison band even for small entries.
    let opts = IntegratorOptions { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
    let x0 = base_state();
    let u = Input::new(2.7692e-4, 0.0177, 0.0, 0.0, 310.15);
    let r = integrate_with_sensitivities(&x0, &u, 0.0, 30.0, &p, &opts).unwrap();

    // Oracle: central differences at relative step 1e-6 over a fixed-step
    // drive, so the perturbed runs share one step sequence and the
    // difference quotient is free of step-control kinks.
    let fd_run = |x: State| integrate_fixed(&x, &u, 0.0, 30.0, 2000, &p).unwrap().to_array();
    // Steps at 1e-6 of each variable's characteristic range. Steps tied to
    // the current values instead would drown small matrix entries in
    // subtraction roundoff (m_P starts at zero) or sweep the glucose
    // sigmoid switch (the feed column).
    let x_range = [4.0, 50.0, 50.0, 100.0, 100.0, 100.0];
    let mut fd_a = [[0.0; 6]; 6];
    for j in 0..6 {
        let base = x0.to_array();
        let h = 1e-6 * x_range[j];
        let mut xp = base;
        xp[j] += h;
        let mut xm = base;
        xm[j] -= h;
        let fp = fd_run(State::from_array(xp));
        let fm = fd_run(State::from_array(xm));
        for i in 0..6 {
            fd_a[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    for i in 0..6 {
        for j in 0..6 {
            let an = r.state_sensitivity[(i, j)];
            let fd = fd_a[i][j];
            if an.abs() > 1e-12 {
                assert_relative_eq!(an, fd, max_relative = 1e-4, epsilon = 1e-9);
            } else {
                // Structurally-zero entries: the oracle sees only FD noise.
                assert!(fd.abs() < 1e-6, "zero entry ({i},{j}) but FD = {fd}");
            }
        }
    }

    let ub = u.to_array();
    let u_range = [0.02, 0.02, 0.02, 0.02, 2.0];
    for j in 0..5 {
        let h = 1e-6 * u_range[j];
        let mut up = ub;
        up[j] += h;
        let mut um = ub;
        um[j] -= h;
        let fp = integrate_fixed(&x0, &Input::from_array(up), 0.0, 30.0, 2000, &p).unwrap().to_array();
        let fm = integrate_fixed(&x0, &Input::from_array(um), 0.0, 30.0, 2000, &p).unwrap().to_array();
        for i in 0..6 {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            let an = r.input_sensitivity[(i, j)];
            if an.abs() > 1e-12 {
                assert_relative_eq!(an, fd, max_relative = 1e-4, epsilon = 1e-9);
            } else {
                assert!(fd.abs() < 1e-6, "zero entry ({i},{j}) but FD = {fd}");
            }
        }
    }
}

#[test]
fn temperature_column_predicts_product_shift() {
    // Perturbing T by +0.01 K moves m_P(t_end) in the direction and
    // magnitude predicted by the B column, within 5%.
    let p = params();
    let opts = IntegratorOptions { rel_tol: 1e-11, abs_tol: 1e-13, ..Default::default() };
    let x0 = State::new(6.5, ComponentVector::new(40.0, 2.0, 45.0, 10.0, 4.0));
    let u = Input::new(1e-3, 4e-4, 1.4e-3, 0.0, 309.0);
    let r = integrate_with_sensitivities(&x0, &u, 0.0, 30.0, &p, &opts).unwrap();

    let dt = 0.01;
    let mut up = u;
    up.temperature += dt;
    let shifted = integrate(&x0, &up, 0.0, 30.0, &p, &opts).unwrap();
    let observed = shifted.masses.product() - r.x_end.masses.product();
    let predicted = r.input_sensitivity[(5, 4)] * dt;
    assert!(observed * predicted > 0.0, "direction mismatch");
    assert_relative_eq!(observed, predicted, max_relative = 0.05);
}

#[test]
fn chain_rule_over_adjacent_intervals() {
    let p = params();
    let opts = IntegratorOptions::default();
    let u = Input::new(5e-4, 3e-4, 6e-4, 0.0, 309.5);
    let first = integrate_with_sensitivities(&base_state(), &u, 0.0, 30.0, &p, &opts).unwrap();
    let second = integrate_with_sensitivities(&first.x_end, &u, 30.0, 60.0, &p, &opts).unwrap();
    let direct = integrate_with_sensitivities(&base_state(), &u, 0.0, 60.0, &p, &opts).unwrap();
    let chained = second.state_sensitivity * first.state_sensitivity;
    for i in 0..6 {
        for j in 0..6 {
            assert!(
                (chained[(i, j)] - direct.state_sensitivity[(i, j)]).abs() <= 1e-8,
                "A mismatch at ({i},{j}): {} vs {}",
                chained[(i, j)],
                direct.state_sensitivity[(i, j)]
            );
        }
    }
}

#[test]
fn fixed_step_halving_shows_fifth_order() {
    // Error against a dense reference decays at the method's nominal order;
    // accept the observed rate within a factor of two.
    let p = params();
    let u = Input::new(5e-4, 5e-4, 0.0, 0.0, 310.15);
    let reference = integrate_fixed(&base_state(), &u, 0.0, 720.0, 40_000, &p).unwrap().to_array();
    let err_of = |n: usize| {
        let x = integrate_fixed(&base_state(), &u, 0.0, 720.0, n, &p).unwrap().to_array();
        x.iter()
            .zip(reference.iter())
            .map(|(a, b)| ((a - b) / b.abs().max(1e-6)).abs())
            .fold(0.0f64, f64::max)
    };
    let e1 = err_of(10);
    let e2 = err_of(20);
    let rate = (e1 / e2).log2();
    assert!(
        (2.5..=10.0).contains(&rate),
        "observed convergence rate {rate} (e1 = {e1}, e2 = {e2})"
    );
}

#[test]
fn repeat_calls_are_bit_identical() {
    let p = params();
    let opts = IntegratorOptions::default();
    let u = Input::new(1e-3, 1e-3, 5e-4, 1e-4, 309.0);
    let a = integrate(&base_state(), &u, 0.0, 30.0, &p, &opts).unwrap();
    let b = integrate(&base_state(), &u, 0.0, 30.0, &p, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reports_bad_interval() {
    let r = integrate(
        &base_state(),
        &Input::batch(310.15),
        10.0,
        0.0,
        &params(),
        &IntegratorOptions::default(),
    );
    assert!(matches!(r, Err(IntegrateError::BadInterval { .. })));
}

#[test]
fn reports_failure_time_when_volume_drains() {
    // Outflow empties the reactor well before t_end; the integrator must
    // fail with a time stamp rather than continue past V = 0.
    let p = params();
    let u = Input::new(0.0, 0.0, 0.0, 0.02, 310.15);
    let x0 = State::new(0.05, ComponentVector::new(0.01, 0.0, 0.3, 0.01, 0.0));
    let err = integrate(&x0, &u, 0.0, 30.0, &p, &IntegratorOptions::default()).unwrap_err();
    match err {
        IntegrateError::StepSizeUnderflow { t }
        | IntegrateError::Model { t, .. }
        | IntegrateError::StepBudgetExhausted { t, .. } => {
            // V(t) = 0.05 - 0.02 t hits zero at t = 2.5 min.
            assert!(t <= 2.6, "failure reported at t = {t}");
        }
        other => panic!("unexpected error {other:?}"),
    }
}

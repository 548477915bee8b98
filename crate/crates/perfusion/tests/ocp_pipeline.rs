//! Cross-module checks of the multiple-shooting transcription: defect
//! feasibility of packed simulations, Jacobians against finite differences,
//! sparsity structure, and a small end-to-end solve.

use perfusion::integrator::IntegratorOptions;
use perfusion::model::{ComponentVector, ModelParameters, State};
use perfusion::nlp::{self, NlpProblem, SolverOptions, SolverStatus};
use perfusion::ocp::{
    defect_norm, extract_solution, initial_guess, ControlGrid, GuessStrategy, OcpBounds, OcpSpec,
    ShootingNlp, FREE_INPUTS, STATE_DIM,
};
use perfusion::scenario::PhaseSchedule;

fn table_initial_state() -> State {
    State::new(5.65, ComponentVector::new(3.955, 0.0, 34.18, 0.678, 0.0))
}

fn full_spec(setup: u8) -> OcpSpec {
    OcpSpec::build(
        setup,
        ControlGrid::default(),
        table_initial_state(),
        OcpBounds::default(),
        ModelParameters::default(),
        IntegratorOptions::default(),
        &PhaseSchedule::default(),
    )
    .unwrap()
}

/// A two-day problem, 8-interval blocking, for tests that solve.
fn short_spec(setup: u8) -> (OcpSpec, PhaseSchedule) {
    let mut schedule = PhaseSchedule::default();
    schedule.t_final_min = 2880.0;
    schedule.t_fedbatch_end_min = 2880.0;
    schedule.sampling.retain(|d| d.start_min < 2880.0);
    let spec = OcpSpec::build(
        setup,
        ControlGrid { num_intervals: 96, interval_min: 30.0, move_blocking: 8 },
        table_initial_state(),
        OcpBounds::default(),
        ModelParameters::default(),
        IntegratorOptions::default(),
        &schedule,
    )
    .unwrap();
    (spec, schedule)
}

#[test]
fn packed_base_case_is_defect_free() {
    let spec = full_spec(1);
    let z = initial_guess(&spec, &GuessStrategy::BaseCase(PhaseSchedule::default())).unwrap();
    let nlp = ShootingNlp::new(spec);
    let defects = defect_norm(&nlp, &z).unwrap();
    assert!(defects <= 1e-6, "max defect {defects}");
}

#[test]
fn objective_at_packed_base_case_matches_simulation() {
    // Setup 3 keeps the base-case sampling, so the packed recipe is the
    // base case itself (up to move blocking).
    let spec = full_spec(3);
    let z = initial_guess(&spec, &GuessStrategy::BaseCase(PhaseSchedule::default())).unwrap();
    let nlp = ShootingNlp::new(spec);
    let objective = nlp.objective(&z).unwrap();
    // Published base-case production 15.57 g, wide band (unpublished phase
    // boundaries; blocking smears the boluses).
    assert!(
        (-objective - 15.57).abs() / 15.57 <= 0.10,
        "objective {} g",
        -objective
    );
}

#[test]
fn constant_feed_zero_equals_batch_simulation() {
    let (spec, _) = short_spec(1);
    let z = initial_guess(&spec, &GuessStrategy::ConstantFeed(perfusion::model::Input::batch(310.15))).unwrap();
    let nlp = ShootingNlp::new(spec.clone());
    assert!(defect_norm(&nlp, &z).unwrap() <= 1e-6);
    let (inputs, states) = nlp.unpack(&z);
    assert!(inputs.iter().all(|u| u.f_water == 0.0 && u.f_glucose == 0.0 && u.f_perfusion == 0.0));
    // Batch: volume constant at V0 on every node.
    assert!(states.iter().all(|s| s.volume == 5.65));
}

#[test]
fn mid_range_guess_is_finite_and_defect_free() {
    let (spec, _) = short_spec(1);
    let mid = perfusion::ocp::mid_range_input(&spec);
    let z = initial_guess(&spec, &GuessStrategy::ConstantFeed(mid)).unwrap();
    let nlp = ShootingNlp::new(spec);
    assert!(nlp.objective(&z).unwrap().is_finite());
    assert!(defect_norm(&nlp, &z).unwrap() <= 1e-6);
}

#[test]
fn constraint_counts_match_problem_statement() {
    for id in 1..=4 {
        let spec = full_spec(id);
        let n = spec.grid.num_intervals;
        let blocks = spec.grid.num_blocks();
        let folded = spec.num_terminal_inequalities();
        assert_eq!(folded, usize::from(id == 2 || id == 4));
        let nlp = ShootingNlp::new(spec);
        assert_eq!(nlp.num_eq(), 6 * n);
        // The terminal glucose cap is a tightened variable bound, so no
        // functional inequalities remain.
        assert_eq!(nlp.num_ineq(), 0);
        assert_eq!(nlp.num_vars(), blocks * FREE_INPUTS + n * STATE_DIM);

        let (lb, ub) = nlp.bounds();
        // Path bounds per node: V boxed, m_G and m_L bounded below.
        let layout = nlp.layout();
        for k in 1..=n {
            assert_eq!(lb[layout.state_index(k, 0)], 0.0);
            assert_eq!(ub[layout.state_index(k, 0)], 1.0);
            assert_eq!(lb[layout.state_index(k, 3)], 0.0);
            assert_eq!(lb[layout.state_index(k, 4)], 0.0);
        }
        let terminal_ub = ub[layout.state_index(n, 3)];
        if folded == 1 {
            assert_eq!(terminal_ub, 1.0 / 128.0);
        } else {
            assert_eq!(terminal_ub, f64::INFINITY);
        }
    }
}

#[test]
fn jacobian_stencil_touches_only_adjacent_stages() {
    let (spec, _) = short_spec(1);
    let nlp = ShootingNlp::new(spec.clone());
    let layout = nlp.layout().clone();
    let structure = nlp.eq_jacobian_structure();
    for (&row, &col) in structure.rows.iter().zip(&structure.cols) {
        let k = row / STATE_DIM;
        let block = k / layout.move_blocking;
        let u_range = layout.input_index(block, 0)..=layout.input_index(block, FREE_INPUTS - 1);
        let xk_range = if k >= 1 {
            Some(layout.state_index(k, 0)..=layout.state_index(k, STATE_DIM - 1))
        } else {
            None
        };
        let xk1_range = layout.state_index(k + 1, 0)..=layout.state_index(k + 1, STATE_DIM - 1);
        let ok = u_range.contains(&col)
            || xk1_range.contains(&col)
            || xk_range.map(|r| r.contains(&col)).unwrap_or(false);
        assert!(ok, "defect row {row} (stage {k}) depends on foreign column {col}");
    }
}

#[test]
fn defect_jacobian_matches_finite_differences() {
    // A random-ish feasible point: perturb the packed base case within
    // bounds, then compare every Jacobian entry with central differences
    // over the scaled variables.
    let (mut spec, schedule) = short_spec(3);
    spec.integrator = IntegratorOptions { rel_tol: 1e-11, abs_tol: 1e-13, ..Default::default() };
    let nlp = ShootingNlp::new(spec.clone());
    let mut z = initial_guess(&spec, &GuessStrategy::BaseCase(schedule)).unwrap();
    // Deterministic wiggle.
    let (lb, ub) = nlp.bounds();
    for (i, v) in z.iter_mut().enumerate() {
        let wiggle = 0.01 * ((i as f64 * 0.7).sin());
        *v = (*v + wiggle).clamp(lb[i].max(-1e6), ub[i].min(1e6));
    }

    let structure = nlp.eq_jacobian_structure();
    let mut values = vec![0.0; structure.len()];
    nlp.eq_jacobian_values(&z, &mut values).unwrap();

    let m = nlp.num_eq();
    let mut c_plus = vec![0.0; m];
    let mut c_minus = vec![0.0; m];
    let h = 1e-6;

    // Group triplets by column for one FD sweep per touched column.
    let mut by_col: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
    for ((&r, &c), &v) in structure.rows.iter().zip(&structure.cols).zip(&values) {
        by_col.entry(c).or_default().push((r, v));
    }
    // Spot-check a deterministic subset of columns (full sweep is slow).
    for (&col, entries) in by_col.iter().step_by(17) {
        let mut zp = z.clone();
        zp[col] += h;
        let mut zm = z.clone();
        zm[col] -= h;
        nlp.eq_constraints(&zp, &mut c_plus).unwrap();
        nlp.eq_constraints(&zm, &mut c_minus).unwrap();
        for &(row, analytic) in entries {
            let fd = (c_plus[row] - c_minus[row]) / (2.0 * h);
            if analytic.abs() > 1e-10 || fd.abs() > 1e-10 {
                let denom = fd.abs().max(analytic.abs()).max(1e-6);
                let rel = (analytic - fd).abs() / denom;
                assert!(rel <= 1e-4, "entry ({row},{col}): analytic {analytic} vs fd {fd} (rel {rel})");
            }
        }
    }
}

#[test]
fn short_horizon_solve_converges_and_extracts() {
    let (spec, schedule) = short_spec(1);
    let nlp = ShootingNlp::new(spec.clone());
    let z0 = initial_guess(&spec, &GuessStrategy::BaseCase(schedule)).unwrap();
    let opts = SolverOptions { kkt_tol: 1e-6, feasibility_tol: 1e-6, ..Default::default() };
    let (z, report) = nlp::solve(&nlp, &z0, &opts).unwrap();
    assert_eq!(report.status, SolverStatus::Converged, "{report:?}");

    let solution = extract_solution(&nlp, &z).unwrap();
    assert!(
        solution.consistent,
        "node/resimulation gap {}",
        solution.max_relative_gap
    );
    // Two days of optimized feeding beat two days of batch-phase recipe.
    let batch = initial_guess(&spec, &GuessStrategy::ConstantFeed(perfusion::model::Input::batch(310.15))).unwrap();
    let batch_objective = nlp.objective(&batch).unwrap();
    assert!(report.final_objective < batch_objective);
    // The optimizer may not beat machine-precision feasibility, but the
    // packed start keeps defects at the solver's feasibility tolerance.
    assert!(report.feasibility <= opts.feasibility_tol);
}

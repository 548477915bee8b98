// Diagnostic probe: solve a configurable-horizon setup-1 problem with live
// iteration logging. Run: cargo run --release -p perfusion --example solve_probe [days] [blocking]
use perfusion::integrator::IntegratorOptions;
use perfusion::model::{ComponentVector, ModelParameters, State};
use perfusion::nlp::{self, NlpProblem, SolverOptions};
use perfusion::ocp::{initial_guess, ControlGrid, GuessStrategy, OcpBounds, OcpSpec, ShootingNlp};
use perfusion::scenario::PhaseSchedule;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let days: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2.0);
    let blocking: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(8);
    let n = (days * 48.0) as usize;

    let mut schedule = PhaseSchedule::default();
    schedule.t_final_min = days * 1440.0;
    schedule.t_batch_end_min = schedule.t_batch_end_min.min(days * 1440.0);
    schedule.t_fedbatch_end_min = schedule.t_fedbatch_end_min.min(days * 1440.0);
    schedule.sampling.retain(|d| d.start_min + d.duration_min <= days * 1440.0);

    let spec = OcpSpec::build(
        1,
        ControlGrid { num_intervals: n, interval_min: 30.0, move_blocking: blocking },
        State::new(5.65, ComponentVector::new(3.955, 0.0, 34.18, 0.678, 0.0)),
        OcpBounds::default(),
        ModelParameters::default(),
        IntegratorOptions::default(),
        &schedule,
    )
    .unwrap();
    let nlp = ShootingNlp::new(spec.clone());
    let z0 = initial_guess(&spec, &GuessStrategy::BaseCase(schedule)).unwrap();
    println!("dim = {}, eq = {}, start objective = {:.4}", nlp.num_vars(), nlp.num_eq(), nlp.objective(&z0).unwrap());

    let t0 = std::time::Instant::now();
    let opts = SolverOptions { feasibility_tol: 1e-9, ..Default::default() };
    let warm = perfusion::ocp::costate_multipliers(&nlp, &z0).unwrap();
    let (z, report) = nlp::solve_warm_started(&nlp, &z0, Some(warm), &opts, |rec| {
        println!(
            "major {:3} obj {:12.6} stat {:9.2e} feas {:9.2e} comp {:9.2e} rho {:8.1e} inner {:4} merit {:12.6} -> {:12.6}",
            rec.iter, rec.objective, rec.stationarity, rec.feasibility, rec.complementarity,
            rec.penalty, rec.inner_iterations, rec.merit_initial, rec.merit_final
        );
    })
    .unwrap();
    println!(
        "status {:?} after {} majors / {} inner, {:.1}s; objective {:.4}",
        report.status, report.major_iterations, report.inner_iterations_total,
        t0.elapsed().as_secs_f64(), report.final_objective
    );
    let _ = z;
}

//! Hybrid shrinking-projection solver: the iterates are projections of the
//! start onto ever smaller polyhedra, all of which contain the solution.

use sepnm::solver::{anchor_monotonicity_audit, cut_audit, solve, validate, Mode, Projector, SolverConfig};
use sepnm::generate_planted;

fn main() {
    let problem = generate_planted(5, 5, 2);
    let x_star = problem.planted_solution.as_ref().expect("planted");

    for projector in [Projector::ActiveSet, Projector::Dykstra] {
        let mut config = SolverConfig::defaults_for(&problem, Mode::Strong);
        config.projector = projector;
        let cfg = validate(config, &problem).expect("defaults are admissible");
        let t0 = std::time::Instant::now();
        let report = solve(&problem, &cfg);
        let state = report.strong_state.as_ref().expect("strong runs keep their cuts");
        println!(
            "{projector:?}: {:?} in {} iterations ({:.2?}), ‖x − x*‖ = {:.2e}, {} cuts",
            report.status,
            report.iterations,
            t0.elapsed(),
            report.final_x.dist(x_star),
            state.cuts().len()
        );
        println!("  x* violates the cuts by at most {:.2e}", cut_audit(state, x_star));
        println!("  ‖x^k − x¹‖ decreases by at most {:.2e}", anchor_monotonicity_audit(&report.history, &problem.x1));
        if let Some(e) = &report.failure {
            println!("  failure: {e}");
        }
    }
}

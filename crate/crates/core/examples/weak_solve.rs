//! Extragradient weak solver on a planted instance, with the audits that
//! back its convergence.

use sepnm::solver::{extragradient_audit, fejer_audit, solve, trace_csv, validate, Mode, SolverConfig};
use sepnm::generate_planted;

fn main() {
    let problem = generate_planted(10, 5, 1);
    let x_star = problem.planted_solution.as_ref().expect("planted");
    let cfg = validate(SolverConfig::defaults_for(&problem, Mode::Weak), &problem).expect("defaults are admissible");
    let c = cfg.config();
    println!("λ bounds {:?}, α = {}, μ = {:.4e} (U = {:.4})", c.lambda.bounds(), c.alpha, c.mu, cfg.norm_bound());

    let report = solve(&problem, &cfg);
    println!(
        "{:?} after {} iterations, residual {:.2e}, ‖x − x*‖ = {:.2e}",
        report.status,
        report.iterations,
        report.final_residual,
        report.final_x.dist(x_star)
    );
    println!("Fejér audit          {:.2e}", fejer_audit(&report.history, x_star));
    println!("extragradient audit  {:.2e}", extragradient_audit(&report.history, x_star, problem.f.c1, problem.f.c2));

    let trace = trace_csv(&report, &problem.x1, Some(x_star));
    for line in trace.lines().take(4) {
        println!("{line}");
    }
    println!("...");
}

use std::fmt::Write as _;

use serde::Serialize;

use super::{
    anchor_monotonicity_audit, cut_audit, extragradient_audit, fejer_audit, Mode, SolveReport, Status, ValidatedConfig,
};
use crate::linalg::Vector;
use crate::problems::ProblemSpec;

pub const TRACE_HEADER: &str = "k,res_xy,res_yz,res_Sz,res_uAt,res_Tu,step,dist_xstar";

/// CSV trace of a run, one row per recorded iteration plus a `k = 0` row.
///
/// Row 0 describes the start: residual columns are empty and `dist_xstar`
/// is `‖x¹ − x*‖`. Row `k` holds the residual parts of iteration `k` and
/// the distance of `x^{k+1}` to `x*`. `dist_xstar` is empty when no planted
/// solution is known. Numbers use Rust's shortest round-trip formatting,
/// so identical runs give identical bytes.
pub fn trace_csv(report: &SolveReport, x1: &Vector, x_star: Option<&Vector>) -> String {
    let dist = |p: &Vector| x_star.map(|s| format!("{:e}", p.dist(s))).unwrap_or_default();
    let mut out = String::with_capacity(64 * (report.history.len() + 2));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    let _ = writeln!(out, "0,,,,,,,{}", dist(x1));
    for rec in &report.history {
        let r = &rec.residuals;
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            rec.k,
            r.xy,
            r.yz,
            r.sz,
            r.u_at,
            r.tu,
            r.step,
            dist(&rec.next_x)
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RunParameters {
    pub mode: Mode,
    pub sep_mode: bool,
    pub lambda_bounds: (f64, f64),
    pub alpha: f64,
    pub mu: f64,
    /// `U ≥ ‖A‖²`; admissible μ lie in `(0, 1/U)`
    pub norm_bound: f64,
    pub alpha_k_bounds: (f64, f64),
    pub tol: f64,
    pub max_iter: usize,
}

/// Worst violations of the inequalities behind the convergence proofs, each
/// 0 when clean. Only the ones meaningful for the run's mode are filled in.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Audits {
    /// needs a planted solution; weak mode
    pub fejer: Option<f64>,
    /// needs a planted solution
    pub extragradient: Option<f64>,
    /// needs a planted solution; strong mode
    pub cuts: Option<f64>,
    /// strong mode
    pub anchor_monotonicity: Option<f64>,
}

impl Audits {
    pub fn new(report: &SolveReport, problem: &ProblemSpec, mode: Mode) -> Self {
        let x_star = problem.planted_solution.as_ref();
        let strong = report.strong_state.as_ref();
        Audits {
            fejer: x_star.filter(|_| mode == Mode::Weak).map(|s| fejer_audit(&report.history, s)),
            extragradient: x_star.map(|s| extragradient_audit(&report.history, s, problem.f.c1, problem.f.c2)),
            cuts: x_star.zip(strong).map(|(s, st)| cut_audit(st, s)),
            anchor_monotonicity: strong.map(|_| anchor_monotonicity_audit(&report.history, &problem.x1)),
        }
    }
}

/// Machine-readable outcome of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub status: Status,
    pub iterations: usize,
    pub final_residual: f64,
    pub final_x: Vector,
    pub final_u: Vector,
    pub distance_to_planted: Option<f64>,
    pub cuts: Option<usize>,
    pub failure: Option<String>,
    pub audits: Audits,
    pub parameters: RunParameters,
}

impl RunSummary {
    pub fn new(report: &SolveReport, cfg: &ValidatedConfig, problem: &ProblemSpec) -> Self {
        let c = cfg.config();
        let x_star = problem.planted_solution.as_ref();
        RunSummary {
            status: report.status,
            iterations: report.iterations,
            final_residual: report.final_residual,
            final_x: report.final_x.clone(),
            final_u: report.final_u.clone(),
            distance_to_planted: x_star.map(|s| report.final_x.dist(s)),
            cuts: report.strong_state.as_ref().map(|s| s.cuts().len()),
            failure: report.failure.as_ref().map(|e| e.to_string()),
            audits: Audits::new(report, problem, c.mode),
            parameters: RunParameters {
                mode: c.mode,
                sep_mode: c.sep_mode,
                lambda_bounds: c.lambda.bounds(),
                alpha: c.alpha,
                mu: c.mu,
                norm_bound: cfg.norm_bound(),
                alpha_k_bounds: c.alpha_k.bounds(),
                tol: c.tol,
                max_iter: c.max_iter,
            },
        }
    }
}

use super::{
    IterateRecord, Mode, Projector, ResidualParts, SolveReport, SolverError, Status, StrongState, ValidatedConfig,
};
use crate::equilibrium::{prox_step_at, resolvent};
use crate::linalg::Vector;
use crate::problems::ProblemSpec;
use crate::sets::{halfspace_dominates, map_apply, project, project_intersection};

/// Feasibility slack of the exact shrinking-set projection.
const ACTIVE_SET_TOL: f64 = 1e-13;

/// The part of an iteration shared by both solvers.
struct Sweep {
    lambda: f64,
    alpha_k: f64,
    y: Vector,
    z: Vector,
    t: Vector,
    u: Vector,
    /// `t + μA*(Tu − At)` before projection onto C
    pushed: Vector,
    sz: f64,
    u_at: f64,
    tu: f64,
}

fn scheduled(name: &'static str, schedule: &super::Schedule, k: usize) -> Result<f64, SolverError> {
    let value = schedule.at(k);
    let (lo, hi) = schedule.bounds();
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(SolverError::ScheduleOutOfBounds { name, k, value })
    }
}

fn sweep(problem: &ProblemSpec, cfg: &ValidatedConfig, x: &Vector, k: usize) -> Result<Sweep, SolverError> {
    let config = &cfg.config;
    if x.dim() != problem.n() {
        return Err(SolverError::DimensionMismatch { expected: problem.n(), found: x.dim() });
    }
    let lambda = scheduled("lambda", &config.lambda, k)?;
    let alpha_k = scheduled("alpha_k", &config.alpha_k, k)?;
    let eq = |source| SolverError::Equilibrium { k, source };
    let proj = |source| SolverError::Projection { k, source };

    let y = prox_step_at(&problem.f, &problem.c, x, x, lambda, &config.inner).map_err(eq)?.minimizer;
    let z = prox_step_at(&problem.f, &problem.c, &y, x, lambda, &config.inner).map_err(eq)?.minimizer;

    let identity_s = config.sep_mode || problem.s.is_identity();
    let (t, sz) = if identity_s {
        (z.clone(), 0.0)
    } else {
        let sz_point = map_apply(&problem.s, &z).map_err(proj)?;
        (z.lerp(config.alpha, &sz_point), sz_point.dist(&z))
    };

    let at = problem.a.mul_vec(&t);
    let u = resolvent(
        &problem.g,
        &problem.q,
        alpha_k,
        &at,
        config.inner.resolvent_tol,
        config.inner.resolvent_max_iter,
    )
    .map_err(eq)?;
    let identity_t = config.sep_mode || problem.t.is_identity();
    let tu = if identity_t { u.clone() } else { map_apply(&problem.t, &u).map_err(proj)? };

    let pushed = t.axpy(config.mu, &problem.a.tr_mul_vec(&(&tu - &at)));
    Ok(Sweep {
        lambda,
        alpha_k,
        u_at: u.dist(&at),
        tu: tu.dist(&u),
        y,
        z,
        t,
        u,
        pushed,
        sz,
    })
}

fn check_divergence(next: &Vector, bound: f64, k: usize) -> Result<(), SolverError> {
    let norm = next.norm();
    if norm.is_finite() && norm <= bound {
        Ok(())
    } else {
        Err(SolverError::Diverged { k, norm })
    }
}

/// One iteration of the weak-convergence scheme from `x = x^k`.
pub fn weak_step(
    problem: &ProblemSpec,
    cfg: &ValidatedConfig,
    x: &Vector,
    k: usize,
) -> Result<IterateRecord, SolverError> {
    let sw = sweep(problem, cfg, x, k)?;
    let next_x = project(&problem.c, &sw.pushed).map_err(|source| SolverError::Projection { k, source })?;
    check_divergence(&next_x, cfg.config.divergence_bound, k)?;
    let residuals = ResidualParts {
        xy: x.dist(&sw.y),
        yz: sw.y.dist(&sw.z),
        sz: sw.sz,
        u_at: sw.u_at,
        tu: sw.tu,
        step: next_x.dist(x),
        sx: None,
        tx: None,
    };
    Ok(IterateRecord {
        k,
        lambda: sw.lambda,
        alpha_k: sw.alpha_k,
        x: x.clone(),
        y: sw.y,
        z: sw.z,
        t: sw.t,
        u: sw.u,
        s: None,
        next_x,
        residuals,
    })
}

/// One iteration of the hybrid scheme: computes `s^k`, appends the two cuts
/// to `state`, and projects the anchor onto the shrunken set.
pub fn strong_step(
    problem: &ProblemSpec,
    cfg: &ValidatedConfig,
    state: &mut StrongState,
    x: &Vector,
    k: usize,
) -> Result<IterateRecord, SolverError> {
    let config = &cfg.config;
    let sw = sweep(problem, cfg, x, k)?;
    let proj = |source| SolverError::Projection { k, source };
    let s = project(&problem.c, &sw.pushed).map_err(proj)?;

    state.push_cut(halfspace_dominates(&s, &sw.t)).map_err(proj)?;
    state.push_cut(halfspace_dominates(&sw.t, x)).map_err(proj)?;
    let exact = match (config.projector, state.exact_projector()) {
        (Projector::ActiveSet, Some(p)) => Some(p.solve(ACTIVE_SET_TOL).map_err(proj)?),
        _ => None,
    };
    let next_x = match exact {
        Some(p) => p,
        None => project_intersection(state.members(), &state.x1, config.dykstra_tol, config.dykstra_max_sweeps)
            .map_err(proj)?,
    };
    check_divergence(&next_x, config.divergence_bound, k)?;

    let residuals = ResidualParts {
        xy: x.dist(&sw.y),
        yz: sw.y.dist(&sw.z),
        sz: sw.sz,
        u_at: sw.u_at,
        tu: sw.tu,
        step: next_x.dist(x),
        sx: Some(s.dist(x)),
        tx: Some(sw.t.dist(x)),
    };
    Ok(IterateRecord {
        k,
        lambda: sw.lambda,
        alpha_k: sw.alpha_k,
        x: x.clone(),
        y: sw.y,
        z: sw.z,
        t: sw.t,
        u: sw.u,
        s: Some(s),
        next_x,
        residuals,
    })
}

struct Run {
    x: Vector,
    u: Vector,
    residual: f64,
    history: Vec<IterateRecord>,
    stride: usize,
    last: Option<IterateRecord>,
}

impl Run {
    fn new(problem: &ProblemSpec, cfg: &ValidatedConfig) -> Self {
        Run {
            x: problem.x1.clone(),
            u: problem.a.mul_vec(&problem.x1),
            residual: f64::INFINITY,
            history: Vec::new(),
            stride: cfg.config.history_stride.max(1),
            last: None,
        }
    }

    fn record(&mut self, rec: IterateRecord) {
        self.x = rec.next_x.clone();
        self.u = rec.u.clone();
        self.residual = rec.residual();
        if rec.k % self.stride == 0 {
            self.history.push(rec);
            self.last = None;
        } else {
            self.last = Some(rec);
        }
    }

    fn finish(
        mut self,
        status: Status,
        iterations: usize,
        strong_state: Option<StrongState>,
        failure: Option<SolverError>,
    ) -> SolveReport {
        self.history.extend(self.last.take());
        SolveReport {
            status,
            iterations,
            final_x: self.x,
            final_u: self.u,
            final_residual: self.residual,
            history: self.history,
            strong_state,
            failure,
        }
    }
}

/// Iterates [`weak_step`] from `x¹` until the largest residual part drops
/// to `tol` or `max_iter` is reached.
pub fn weak_solve(problem: &ProblemSpec, cfg: &ValidatedConfig) -> SolveReport {
    let mut run = Run::new(problem, cfg);
    for k in 1..=cfg.config.max_iter {
        match weak_step(problem, cfg, &run.x, k) {
            Ok(rec) => {
                run.record(rec);
                if run.residual <= cfg.config.tol {
                    return run.finish(Status::Converged, k, None, None);
                }
            }
            Err(e) => return run.finish(Status::InnerFailure, k - 1, None, Some(e)),
        }
    }
    let iters = cfg.config.max_iter;
    run.finish(Status::MaxIterReached, iters, None, None)
}

/// Iterates [`strong_step`] from `x¹ ∈ C₁ = C`. The residual includes
/// `‖s^k − x^k‖` and `‖t^k − x^k‖`.
pub fn strong_solve(problem: &ProblemSpec, cfg: &ValidatedConfig) -> SolveReport {
    let mut run = Run::new(problem, cfg);
    let mut state = StrongState::new(&problem.c, problem.x1.clone());
    for k in 1..=cfg.config.max_iter {
        match strong_step(problem, cfg, &mut state, &run.x, k) {
            Ok(rec) => {
                run.record(rec);
                if run.residual <= cfg.config.tol {
                    return run.finish(Status::Converged, k, Some(state), None);
                }
            }
            Err(e) => return run.finish(Status::InnerFailure, k - 1, Some(state), Some(e)),
        }
    }
    let iters = cfg.config.max_iter;
    run.finish(Status::MaxIterReached, iters, Some(state), None)
}

/// Dispatches on the configured mode.
pub fn solve(problem: &ProblemSpec, cfg: &ValidatedConfig) -> SolveReport {
    match cfg.config.mode {
        Mode::Weak => weak_solve(problem, cfg),
        Mode::Strong => strong_solve(problem, cfg),
    }
}

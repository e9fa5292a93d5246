//! The two solvers.
//!
//! Both share one extragradient sweep per iteration:
//!
//! ```text
//! y = argmin { λ_k f(x, ·) + ½‖· − x‖² : C }
//! z = argmin { λ_k f(y, ·) + ½‖· − x‖² : C }
//! t = (1 − α) z + α S z
//! u = T_{α_k}^g (A t)
//! p = P_C(t + μ A*(T u − A t))
//! ```
//!
//! [`weak_solve`] takes `p` as the next iterate. [`strong_solve`] names it
//! `s`, adds the cuts `‖s − r‖ ≤ ‖t − r‖` and `‖t − r‖ ≤ ‖x − r‖` to a
//! shrinking set, and projects the start point `x¹` onto that set.
//! With `sep_mode` both maps are the identity, so `t = z` and `Tu = u`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::EquilibriumError;
use crate::linalg::Vector;
use crate::sets::{ConvexSet, PolyhedralProjector, SetError};

mod audit;
mod config;
mod iterate;
mod trace;

pub use audit::{anchor_monotonicity_audit, cauchy_audit, cut_audit, extragradient_audit, fejer_audit};
pub use config::{
    lambda_bound, norm_bound, validate, ConfigViolation, Mode, Projector, Schedule, SolverConfig, ValidatedConfig,
};
pub use iterate::{solve, strong_solve, strong_step, weak_solve, weak_step};
pub use trace::{trace_csv, Audits, RunSummary, TRACE_HEADER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<ConfigViolation>),
    #[error("inner solver failed at iteration {k}: {source}")]
    Equilibrium { k: usize, source: EquilibriumError },
    #[error("projection failed at iteration {k}: {source}")]
    Projection { k: usize, source: SetError },
    #[error("{name} schedule left its declared bounds at iteration {k}: {value}")]
    ScheduleOutOfBounds { name: &'static str, k: usize, value: f64 },
    #[error("iterate diverged at iteration {k} (norm {norm:.3e})")]
    Diverged { k: usize, norm: f64 },
    #[error("point has dimension {found}, problem lives in R^{expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// The stopping quantities of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualParts {
    /// ‖x − y‖
    pub xy: f64,
    /// ‖y − z‖
    pub yz: f64,
    /// ‖Sz − z‖
    pub sz: f64,
    /// ‖u − At‖
    pub u_at: f64,
    /// ‖Tu − u‖
    pub tu: f64,
    /// ‖x_next − x‖
    pub step: f64,
    /// ‖s − x‖, strong mode only
    pub sx: Option<f64>,
    /// ‖t − x‖, strong mode only
    pub tx: Option<f64>,
}

impl ResidualParts {
    pub fn max(&self) -> f64 {
        [self.xy, self.yz, self.sz, self.u_at, self.tu, self.step]
            .into_iter()
            .chain(self.sx)
            .chain(self.tx)
            .fold(0.0, f64::max)
    }
}

/// Everything computed in iteration `k` starting from `x = x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub lambda: f64,
    pub alpha_k: f64,
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    pub t: Vector,
    pub u: Vector,
    /// strong mode only
    pub s: Option<Vector>,
    pub next_x: Vector,
    pub residuals: ResidualParts,
}

impl IterateRecord {
    pub fn residual(&self) -> f64 {
        self.residuals.max()
    }
}

/// Outward shift of every cut inside the exact projector. Cuts built from
/// nearly coincident points are only accurate to about this much, and
/// without it the represented set can be numerically empty.
pub const CUT_SLACK: f64 = 1e-8;

/// The shrinking set `C_{k+1} = C ∩ cuts` of the hybrid method.
///
/// Cuts are never dropped, so memory grows as O(k·n).
#[derive(Debug, Clone, PartialEq)]
pub struct StrongState {
    pub x1: Vector,
    /// `[C, cut₁, cut₂, …]`
    members: Vec<ConvexSet>,
    /// warm-started exact projector, absent when `C` is not polyhedral
    exact: Option<PolyhedralProjector>,
}

impl StrongState {
    pub fn new(c: &ConvexSet, x1: Vector) -> Self {
        let mut exact = PolyhedralProjector::new(&x1);
        let exact = matches!(exact.add(c), Ok(true)).then_some(exact);
        StrongState { x1, members: vec![c.clone()], exact }
    }

    pub fn cuts(&self) -> &[ConvexSet] {
        &self.members[1..]
    }

    /// `C` followed by every accumulated cut.
    pub fn members(&self) -> &[ConvexSet] {
        &self.members
    }

    pub(crate) fn push_cut(&mut self, cut: ConvexSet) -> Result<(), SetError> {
        if let Some(p) = &mut self.exact {
            p.add_relaxed(&cut, CUT_SLACK)?;
        }
        self.members.push(cut);
        Ok(())
    }

    pub(crate) fn exact_projector(&mut self) -> Option<&mut PolyhedralProjector> {
        self.exact.as_mut()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIterReached,
    InnerFailure,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: Status,
    pub iterations: usize,
    pub final_x: Vector,
    pub final_u: Vector,
    pub final_residual: f64,
    pub history: Vec<IterateRecord>,
    /// the shrinking set at exit, strong mode only
    pub strong_state: Option<StrongState>,
    pub failure: Option<SolverError>,
}

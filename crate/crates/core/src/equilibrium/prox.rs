//! Proximal sub-steps and the resolvent `T_α^g`.

use serde::{Deserialize, Serialize};

use super::{Bifunction, BifunctionKind, EquilibriumError};
use crate::linalg::Vector;
use crate::sets::{project, ConvexSet};

/// Membership slack accepted for points that should lie in the domain.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Tolerances and budgets for the inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerOptions {
    pub prox_tol: f64,
    pub prox_max_iter: usize,
    /// initial step η₀ of the projected subgradient scheme, η_j = η₀/(j+1)
    pub prox_step0: f64,
    pub resolvent_tol: f64,
    pub resolvent_max_iter: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions {
            prox_tol: 1e-10,
            prox_max_iter: 100_000,
            prox_step0: 1.0,
            resolvent_tol: 1e-9,
            resolvent_max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub minimizer: Vector,
    pub inner_iterations: usize,
    pub inner_residual: f64,
}

/// `argmin { λ f(x, y) + ½‖y − x‖² : y ∈ C }`.
pub fn prox_step(
    f: &Bifunction,
    c: &ConvexSet,
    x: &Vector,
    lambda: f64,
    opts: &InnerOptions,
) -> Result<ProxResult, EquilibriumError> {
    prox_step_at(f, c, x, x, lambda, opts)
}

/// `argmin { λ f(lin, y) + ½‖y − anchor‖² : y ∈ C }`.
///
/// With `lin = anchor` this is the plain proximal step; the extragradient
/// correction linearizes at the first prox point but keeps the original
/// anchor. Affine VI bifunctions are solved in closed form as
/// `P_C(anchor − λ F(lin))`; general bifunctions by projected subgradient
/// descent with steps `η₀/(j+1)`.
pub fn prox_step_at(
    f: &Bifunction,
    c: &ConvexSet,
    lin: &Vector,
    anchor: &Vector,
    lambda: f64,
    opts: &InnerOptions,
) -> Result<ProxResult, EquilibriumError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(EquilibriumError::NonPositiveParameter(lambda));
    }
    f.check_dim(lin)?;
    f.check_dim(anchor)?;
    let violation = c.violation(anchor);
    if violation > MEMBERSHIP_TOL {
        return Err(EquilibriumError::NotInDomain { violation });
    }

    if let BifunctionKind::ViAffine { .. } = f.kind {
        let grad = f.subgradient_y(lin, anchor);
        let minimizer = project(c, &anchor.axpy(-lambda, &grad))?;
        return Ok(ProxResult { minimizer, inner_iterations: 1, inner_residual: 0.0 });
    }

    let mut y = project(c, anchor)?;
    let mut displacement = f64::INFINITY;
    for j in 0..opts.prox_max_iter {
        let g = &f.subgradient_y(lin, &y).scale(lambda) + &(&y - anchor);
        let step = opts.prox_step0 / (j as f64 + 1.0);
        let next = project(c, &y.axpy(-step, &g))?;
        displacement = next.dist(&y);
        y = next;
        if displacement < opts.prox_tol {
            return Ok(ProxResult { minimizer: y, inner_iterations: j + 1, inner_residual: displacement });
        }
    }
    Err(EquilibriumError::ProxNonConvergence {
        iterations: opts.prox_max_iter,
        inner_residual: displacement,
    })
}

/// The resolvent `T_α^g(u)`: the point `w ∈ Q` with
/// `g(w, v) + (1/α)⟨v − w, w − u⟩ ≥ 0` for all `v ∈ Q`.
///
/// For an affine VI bifunction `g(w, v) = ⟨G(w), v − w⟩` this is the
/// strongly monotone VI for `αG(·) + (· − u)` on `Q`, solved by the
/// projection iteration `w ← P_Q(w − ρ(αG(w) + w − u))`. The step is
/// `ρ = 1/(1 + αL)` when `M` is symmetric and `1/(1 + αL)²` otherwise, which
/// makes the iteration a contraction in both cases. General bifunctions use
/// a subgradient selection of `g(w, ·)` at `w` in place of `G(w)` with
/// `L = 2·max(c₁, c₂)`; that scheme has no convergence guarantee.
pub fn resolvent(
    g: &Bifunction,
    q: &ConvexSet,
    alpha: f64,
    u: &Vector,
    tol: f64,
    max_inner: usize,
) -> Result<Vector, EquilibriumError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(EquilibriumError::NonPositiveParameter(alpha));
    }
    g.check_dim(u)?;

    let lipschitz = g.operator_norm();
    let symmetric = match &g.kind {
        BifunctionKind::ViAffine { m, .. } => m.is_symmetric(),
        BifunctionKind::General { .. } => false,
    };
    let rho = if symmetric {
        1.0 / (1.0 + alpha * lipschitz)
    } else {
        1.0 / (1.0 + alpha * lipschitz).powi(2)
    };

    let mut w = project(q, u)?;
    let mut displacement = f64::INFINITY;
    for _ in 0..max_inner {
        let field = &g.subgradient_y(&w, &w).scale(alpha) + &(&w - u);
        let next = project(q, &w.axpy(-rho, &field))?;
        displacement = next.dist(&w);
        w = next;
        if displacement < tol {
            return Ok(w);
        }
    }
    Err(EquilibriumError::ResolventNonConvergence {
        iterations: max_inner,
        last_displacement: displacement,
    })
}

//! Equilibrium bifunctions and the sub-problems the solvers need from them.
//!
//! A [`Bifunction`] is either an affine variational-inequality bifunction
//! `f(x, y) = ⟨Mx + q, y − x⟩` or a user-supplied pair of closures. The
//! proximal step and the resolvent live in [`prox`], the brute-force grid
//! oracle used to cross-check the resolvent in [`oracle`], and sampled
//! checks of the standing assumptions in [`assumptions`].

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{self, DenseOperator, LinalgError, Vector};
use crate::sets::SetError;

pub mod assumptions;
pub mod oracle;
pub mod prox;

pub use assumptions::{check_assumptions, AssumptionReport};
pub use oracle::{resolvent_oracle, resolvent_oracle_refined, GridOracle};
pub use prox::{prox_step, prox_step_at, resolvent, InnerOptions, ProxResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("step parameter must be positive, got {0}")]
    NonPositiveParameter(f64),
    #[error("point lies outside the constraint set (violation {violation:.3e})")]
    NotInDomain { violation: f64 },
    #[error("proximal sub-problem did not converge in {iterations} iterations (residual {inner_residual:.3e})")]
    ProxNonConvergence { iterations: usize, inner_residual: f64 },
    #[error("resolvent iteration did not converge in {iterations} iterations (last displacement {last_displacement:.3e})")]
    ResolventNonConvergence { iterations: usize, last_displacement: f64 },
    #[error("grid oracle unsupported: {0}")]
    OracleUnsupported(String),
    #[error("bifunction acts on R^{expected}, got dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Monotone,
    Pseudomonotone,
}

type EvalFn = dyn Fn(&Vector, &Vector) -> f64 + Send + Sync;
type SubgradFn = dyn Fn(&Vector, &Vector) -> Vector + Send + Sync;

#[derive(Clone)]
pub enum BifunctionKind {
    /// `f(x, y) = ⟨M x + q, y − x⟩`
    ViAffine {
        m: DenseOperator,
        q: Vector,
        /// cached ‖M‖ upper bound
        m_norm: OnceLock<f64>,
    },
    /// User-supplied `f(x, y)` and a selection `s ∈ ∂f(x, ·)(y)`. Both must
    /// be pure.
    General {
        dim: usize,
        evaluate: Arc<EvalFn>,
        subgradient_y: Arc<SubgradFn>,
    },
}

impl fmt::Debug for BifunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BifunctionKind::ViAffine { m, q, .. } => {
                f.debug_struct("ViAffine").field("m", m).field("q", q).finish()
            }
            BifunctionKind::General { dim, .. } => {
                f.debug_struct("General").field("dim", dim).finish_non_exhaustive()
            }
        }
    }
}

impl PartialEq for BifunctionKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                BifunctionKind::ViAffine { m: m1, q: q1, .. },
                BifunctionKind::ViAffine { m: m2, q: q2, .. },
            ) => m1 == m2 && q1 == q2,
            (
                BifunctionKind::General { evaluate: e1, subgradient_y: s1, .. },
                BifunctionKind::General { evaluate: e2, subgradient_y: s2, .. },
            ) => Arc::ptr_eq(e1, e2) && Arc::ptr_eq(s1, s2),
            _ => false,
        }
    }
}

/// An equilibrium bifunction with its monotonicity class and Lipschitz-type
/// constants `c₁, c₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bifunction {
    pub kind: BifunctionKind,
    pub monotonicity: Monotonicity,
    pub c1: f64,
    pub c2: f64,
}

impl Bifunction {
    /// Affine VI bifunction with `c₁ = c₂ = ‖M‖/2`, which always satisfies
    /// the Lipschitz-type inequality since `f(x,y) + f(y,z) − f(x,z) =
    /// ⟨F(y) − F(x), z − y⟩ ≥ −‖M‖‖x − y‖‖y − z‖`.
    pub fn vi_affine(
        m: DenseOperator,
        q: Vector,
        monotonicity: Monotonicity,
    ) -> Result<Self, EquilibriumError> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(EquilibriumError::DimensionMismatch { expected: rows, found: cols });
        }
        if q.dim() != rows {
            return Err(EquilibriumError::DimensionMismatch { expected: rows, found: q.dim() });
        }
        let kind = BifunctionKind::ViAffine { m, q, m_norm: OnceLock::new() };
        let mut f = Bifunction { kind, monotonicity, c1: 1.0, c2: 1.0 };
        // c must stay > 0 even for M = 0
        let c = (f.operator_norm() / 2.0).max(f64::EPSILON);
        f.c1 = c;
        f.c2 = c;
        Ok(f)
    }

    /// Affine VI bifunction with explicitly chosen constants.
    pub fn vi_affine_with_constants(
        m: DenseOperator,
        q: Vector,
        monotonicity: Monotonicity,
        c1: f64,
        c2: f64,
    ) -> Result<Self, EquilibriumError> {
        let mut f = Self::vi_affine(m, q, monotonicity)?;
        for c in [c1, c2] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(EquilibriumError::NonPositiveParameter(c));
            }
        }
        f.c1 = c1;
        f.c2 = c2;
        Ok(f)
    }

    /// The zero bifunction on ℝⁿ.
    pub fn zero(dim: usize) -> Self {
        Self::vi_affine(DenseOperator::zeros(dim, dim), Vector::zeros(dim), Monotonicity::Monotone)
            .expect("square zero operator")
    }

    pub fn general(
        dim: usize,
        evaluate: impl Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
        subgradient_y: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
        monotonicity: Monotonicity,
        c1: f64,
        c2: f64,
    ) -> Self {
        Bifunction {
            kind: BifunctionKind::General {
                dim,
                evaluate: Arc::new(evaluate),
                subgradient_y: Arc::new(subgradient_y),
            },
            monotonicity,
            c1,
            c2,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BifunctionKind::ViAffine { q, .. } => q.dim(),
            BifunctionKind::General { dim, .. } => *dim,
        }
    }

    pub fn is_vi_affine(&self) -> bool {
        matches!(self.kind, BifunctionKind::ViAffine { .. })
    }

    /// Lipschitz bound of the underlying operator: ‖M‖ for affine VI
    /// bifunctions (power iteration with safety 1.01), `2·max(c₁, c₂)`
    /// otherwise.
    pub fn operator_norm(&self) -> f64 {
        match &self.kind {
            BifunctionKind::ViAffine { m, m_norm, .. } => *m_norm.get_or_init(|| {
                if m.is_zero() {
                    0.0
                } else {
                    linalg::operator_norm_sq_upper(
                        m,
                        linalg::DEFAULT_POWER_ITERS,
                        linalg::DEFAULT_NORM_SAFETY,
                    )
                    .sqrt()
                }
            }),
            BifunctionKind::General { .. } => 2.0 * self.c1.max(self.c2),
        }
    }

    /// `F(x) = Mx + q` for affine VI bifunctions.
    pub fn operator(&self, x: &Vector) -> Option<Vector> {
        match &self.kind {
            BifunctionKind::ViAffine { m, q, .. } => Some(&m.mul_vec(x) + q),
            BifunctionKind::General { .. } => None,
        }
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        match &self.kind {
            BifunctionKind::ViAffine { m, q, .. } => (&m.mul_vec(x) + q).dot(&(y - x)),
            BifunctionKind::General { evaluate, .. } => evaluate(x, y),
        }
    }

    /// A subgradient of `f(x, ·)` at `y`.
    pub fn subgradient_y(&self, x: &Vector, y: &Vector) -> Vector {
        match &self.kind {
            BifunctionKind::ViAffine { m, q, .. } => &m.mul_vec(x) + q,
            BifunctionKind::General { subgradient_y, .. } => subgradient_y(x, y),
        }
    }

    pub(crate) fn check_dim(&self, x: &Vector) -> Result<(), EquilibriumError> {
        if x.dim() == self.dim() {
            Ok(())
        } else {
            Err(EquilibriumError::DimensionMismatch { expected: self.dim(), found: x.dim() })
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawBifunction {
    ViAffine {
        #[serde(rename = "M")]
        m: DenseOperator,
        q: Vector,
        c1: f64,
        c2: f64,
        monotonicity: Monotonicity,
    },
}

impl Serialize for Bifunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.kind {
            BifunctionKind::ViAffine { m, q, .. } => RawBifunction::ViAffine {
                m: m.clone(),
                q: q.clone(),
                c1: self.c1,
                c2: self.c2,
                monotonicity: self.monotonicity,
            }
            .serialize(serializer),
            BifunctionKind::General { .. } => {
                Err(S::Error::custom("closure-backed bifunctions cannot be serialized"))
            }
        }
    }
}

impl<'de> Deserialize<'de> for Bifunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let RawBifunction::ViAffine { m, q, c1, c2, monotonicity } =
            RawBifunction::deserialize(deserializer)?;
        Bifunction::vi_affine_with_constants(m, q, monotonicity, c1, c2).map_err(D::Error::custom)
    }
}

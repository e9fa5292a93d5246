use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::InnerOptions;
use crate::linalg::{operator_norm_sq_upper, DEFAULT_NORM_SAFETY, DEFAULT_POWER_ITERS};
use crate::problems::ProblemSpec;
use crate::sets::{DYKSTRA_MAX_SWEEPS, DYKSTRA_TOL};

/// A parameter sequence `k ↦ p_k` with declared bounds.
#[derive(Clone)]
pub enum Schedule {
    Constant(f64),
    /// `lower ≤ f(k) ≤ upper` is checked at every use.
    Custom {
        lower: f64,
        upper: f64,
        f: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    },
}

impl Schedule {
    pub fn custom(lower: f64, upper: f64, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Schedule::Custom { lower, upper, f: Arc::new(f) }
    }

    pub fn at(&self, k: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::Custom { f, .. } => f(k),
        }
    }

    /// Declared `[lower, upper]`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Schedule::Constant(v) => (*v, *v),
            Schedule::Custom { lower, upper, .. } => (*lower, *upper),
        }
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Schedule::Custom { lower, upper, .. } => f
                .debug_struct("Custom")
                .field("lower", lower)
                .field("upper", upper)
                .finish_non_exhaustive(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Weak,
    Strong,
}

/// How the strong solver projects `x¹` onto `C ∩ cuts`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projector {
    /// exact dual active-set projection; Dykstra when `C` is not polyhedral
    ActiveSet,
    Dykstra,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// λ_k, must stay inside `(0, min{1/2c₁, 1/2c₂})`
    pub lambda: Schedule,
    /// averaging weight of `t = (1 − α)z + αSz`
    pub alpha: f64,
    /// dual step, `0 < μ < 1/‖A‖²`
    pub mu: f64,
    /// resolvent parameters α_k, bounded away from 0
    pub alpha_k: Schedule,
    pub tol: f64,
    pub max_iter: usize,
    pub mode: Mode,
    /// force `S = T = I`
    pub sep_mode: bool,
    pub inner: InnerOptions,
    pub projector: Projector,
    pub dykstra_tol: f64,
    pub dykstra_max_sweeps: usize,
    /// keep every `history_stride`-th record (and always the last) in the
    /// report; the strong-mode cuts are never thinned
    pub history_stride: usize,
    /// abort once `‖x^k‖` exceeds this
    pub divergence_bound: f64,
}

/// Certified `U ≥ ‖A‖²` used for the μ bound.
pub fn norm_bound(problem: &ProblemSpec) -> f64 {
    operator_norm_sq_upper(&problem.a, DEFAULT_POWER_ITERS, DEFAULT_NORM_SAFETY)
}

/// `min{1/(2c₁), 1/(2c₂)}`
pub fn lambda_bound(problem: &ProblemSpec) -> f64 {
    (1.0 / (2.0 * problem.f.c1)).min(1.0 / (2.0 * problem.f.c2))
}

impl SolverConfig {
    /// λ ≡ 0.9·min{1/2c₁, 1/2c₂}, α = 0.5, α_k ≡ 1, μ = 0.5/U, tol 1e-6,
    /// 50 000 iterations.
    pub fn defaults_for(problem: &ProblemSpec, mode: Mode) -> Self {
        SolverConfig {
            lambda: Schedule::Constant(0.9 * lambda_bound(problem)),
            alpha: 0.5,
            mu: 0.5 / norm_bound(problem),
            alpha_k: Schedule::Constant(1.0),
            tol: 1e-6,
            max_iter: 50_000,
            mode,
            sep_mode: false,
            inner: InnerOptions::default(),
            projector: Projector::ActiveSet,
            dykstra_tol: DYKSTRA_TOL,
            dykstra_max_sweeps: DYKSTRA_MAX_SWEEPS,
            history_stride: 1,
            divergence_bound: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigViolation {
    #[error("lambda bounds [{lower}, {upper}] must satisfy 0 < a <= b < {bound}")]
    LambdaOutOfRange { lower: f64, upper: f64, bound: f64 },
    #[error("alpha = {0} must lie in (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("mu = {mu} must be positive")]
    MuNonPositive { mu: f64 },
    #[error("mu = {mu} must be below 1/U = {bound} (U = {norm_bound} bounds ||A||^2)")]
    MuTooLarge { mu: f64, bound: f64, norm_bound: f64 },
    #[error("alpha_k lower bound {0} must be positive")]
    AlphaKNotBoundedBelow(f64),
    #[error("tolerance {0} must be positive")]
    BadTolerance(f64),
    #[error("max_iter must be at least 1")]
    ZeroMaxIter,
}

/// A configuration checked against a problem's constants.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub(crate) config: SolverConfig,
    pub(crate) norm_bound: f64,
}

impl ValidatedConfig {
    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// The bound `U ≥ ‖A‖²` the configuration was checked against.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Skips validation. Only meant for negative controls that deliberately
    /// break the step-size hypotheses.
    pub fn assume_valid(config: SolverConfig, problem: &ProblemSpec) -> Self {
        ValidatedConfig { config, norm_bound: norm_bound(problem) }
    }
}

/// Checks every hypothesis on the parameters and reports all violations.
pub fn validate(config: SolverConfig, problem: &ProblemSpec) -> Result<ValidatedConfig, Vec<ConfigViolation>> {
    let mut errors = Vec::new();
    let u = norm_bound(problem);

    let (a, b) = config.lambda.bounds();
    let bound = lambda_bound(problem);
    if !(a > 0.0 && a <= b && b < bound) {
        errors.push(ConfigViolation::LambdaOutOfRange { lower: a, upper: b, bound });
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        errors.push(ConfigViolation::AlphaOutOfRange(config.alpha));
    }
    if !(config.mu > 0.0) {
        errors.push(ConfigViolation::MuNonPositive { mu: config.mu });
    } else if !(config.mu < 1.0 / u) {
        errors.push(ConfigViolation::MuTooLarge { mu: config.mu, bound: 1.0 / u, norm_bound: u });
    }
    let (alpha_k_lower, _) = config.alpha_k.bounds();
    if !(alpha_k_lower > 0.0) {
        errors.push(ConfigViolation::AlphaKNotBoundedBelow(alpha_k_lower));
    }
    if !(config.tol > 0.0) {
        errors.push(ConfigViolation::BadTolerance(config.tol));
    }
    if config.max_iter == 0 {
        errors.push(ConfigViolation::ZeroMaxIter);
    }

    if errors.is_empty() {
        Ok(ValidatedConfig { config, norm_bound: u })
    } else {
        Err(errors)
    }
}

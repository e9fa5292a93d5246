//! Projectable closed convex sets and the nonexpansive maps built from them.
//!
//! Every set variant has a closed-form metric projection except
//! [`ConvexSet::Intersection`], which is projected with Dykstra's
//! alternating-projection algorithm ([`project_intersection`]). The shrinking
//! sets of the hybrid solver are intersections of the base set with many
//! halfspaces produced by [`halfspace_dominates`]; when all members are
//! polyhedral, [`project_polyhedral`] projects onto them exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, Vector};

mod polyhedral;

pub use polyhedral::{project_polyhedral, PolyhedralProjector};

/// Normals shorter than this are read as "no constraint".
pub const DEGENERATE_NORMAL: f64 = 1e-14;
pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("dimension mismatch: set lives in R^{expected}, point has dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty set: {0}")]
    Empty(String),
    #[error("invalid set: {0}")]
    Invalid(String),
    #[error(
        "Dykstra did not converge after {sweeps} sweeps (worst membership violation {worst_violation:.3e}); intersection may be empty"
    )]
    NonConvergence { sweeps: usize, worst_violation: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A nonempty closed convex subset of ℝⁿ with a computable projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet", into = "RawSet")]
pub enum ConvexSet {
    WholeSpace { dim: usize },
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    /// `{x : ⟨normal, x⟩ ≤ offset}`
    Halfspace { normal: Vector, offset: f64 },
    Intersection { members: Vec<ConvexSet> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawSet {
    Whole { dim: usize },
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    Halfspace { normal: Vector, offset: f64 },
    Intersection { members: Vec<ConvexSet> },
}

impl TryFrom<RawSet> for ConvexSet {
    type Error = SetError;

    fn try_from(raw: RawSet) -> Result<Self, SetError> {
        let set = match raw {
            RawSet::Whole { dim } => ConvexSet::WholeSpace { dim },
            RawSet::Box { lower, upper } => ConvexSet::Box { lower, upper },
            RawSet::Ball { center, radius } => ConvexSet::Ball { center, radius },
            RawSet::Halfspace { normal, offset } => ConvexSet::Halfspace { normal, offset },
            RawSet::Intersection { members } => ConvexSet::Intersection { members },
        };
        set.validate()?;
        Ok(set)
    }
}

impl From<ConvexSet> for RawSet {
    fn from(set: ConvexSet) -> Self {
        match set {
            ConvexSet::WholeSpace { dim } => RawSet::Whole { dim },
            ConvexSet::Box { lower, upper } => RawSet::Box { lower, upper },
            ConvexSet::Ball { center, radius } => RawSet::Ball { center, radius },
            ConvexSet::Halfspace { normal, offset } => RawSet::Halfspace { normal, offset },
            ConvexSet::Intersection { members } => RawSet::Intersection { members },
        }
    }
}

impl ConvexSet {
    pub fn whole(dim: usize) -> Self {
        ConvexSet::WholeSpace { dim }
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self, SetError> {
        let s = ConvexSet::Box { lower, upper };
        s.validate()?;
        Ok(s)
    }

    /// The box `[lo, hi]ⁿ`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, SetError> {
        Self::boxed(Vector::filled(dim, lo), Vector::filled(dim, hi))
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self, SetError> {
        let s = ConvexSet::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self, SetError> {
        let s = ConvexSet::Halfspace { normal, offset };
        s.validate()?;
        Ok(s)
    }

    pub fn intersection(members: Vec<ConvexSet>) -> Result<Self, SetError> {
        let s = ConvexSet::Intersection { members };
        s.validate()?;
        Ok(s)
    }

    /// Checks the structural invariants of the description.
    pub fn validate(&self) -> Result<(), SetError> {
        match self {
            ConvexSet::WholeSpace { dim } => {
                if *dim == 0 {
                    return Err(SetError::Invalid("whole space of dimension 0".into()));
                }
            }
            ConvexSet::Box { lower, upper } => {
                if lower.dim() != upper.dim() {
                    return Err(SetError::DimensionMismatch {
                        expected: lower.dim(),
                        found: upper.dim(),
                    });
                }
                if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
                    return Err(SetError::Empty(format!(
                        "box has lower[{i}] = {} > upper[{i}] = {}",
                        lower[i], upper[i]
                    )));
                }
            }
            ConvexSet::Ball { radius, .. } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(SetError::Invalid(format!("ball radius {radius} must be >= 0")));
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                if !offset.is_finite() {
                    return Err(SetError::Invalid("halfspace offset must be finite".into()));
                }
                if normal.norm() < DEGENERATE_NORMAL && *offset < -DEGENERATE_NORMAL {
                    return Err(SetError::Empty(format!(
                        "halfspace with zero normal and offset {offset} < 0"
                    )));
                }
            }
            ConvexSet::Intersection { members } => {
                let first = members
                    .first()
                    .ok_or_else(|| SetError::Invalid("intersection needs at least one member".into()))?;
                let dim = first.dim();
                for m in members {
                    m.validate()?;
                    if m.dim() != dim {
                        return Err(SetError::DimensionMismatch { expected: dim, found: m.dim() });
                    }
                }
            }
        }
        Ok(())
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::WholeSpace { dim } => *dim,
            ConvexSet::Box { lower, .. } => lower.dim(),
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Halfspace { normal, .. } => normal.dim(),
            ConvexSet::Intersection { members } => members.first().map_or(0, |m| m.dim()),
        }
    }

    /// Whether the description constrains nothing.
    pub fn is_whole_space(&self) -> bool {
        match self {
            ConvexSet::WholeSpace { .. } => true,
            ConvexSet::Halfspace { normal, .. } => normal.norm() < DEGENERATE_NORMAL,
            ConvexSet::Intersection { members } => members.iter().all(|m| m.is_whole_space()),
            _ => false,
        }
    }

    /// Distance-like measure of how far `x` lies outside the set; 0 inside.
    ///
    /// Exact Euclidean distance for balls and halfspaces, the largest
    /// coordinate excess for boxes, and the worst member for intersections.
    pub fn violation(&self, x: &Vector) -> f64 {
        match self {
            ConvexSet::WholeSpace { .. } => 0.0,
            ConvexSet::Box { lower, upper } => (0..x.dim())
                .map(|i| (lower[i] - x[i]).max(x[i] - upper[i]))
                .fold(0.0, f64::max),
            ConvexSet::Ball { center, radius } => (x.dist(center) - radius).max(0.0),
            ConvexSet::Halfspace { normal, offset } => {
                let nn = normal.norm();
                if nn < DEGENERATE_NORMAL {
                    0.0
                } else {
                    ((normal.dot(x) - offset) / nn).max(0.0)
                }
            }
            ConvexSet::Intersection { members } => {
                members.iter().map(|m| m.violation(x)).fold(0.0, f64::max)
            }
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.violation(x) <= tol
    }

    /// An axis-aligned box containing the set, when one is known.
    pub fn bounding_box(&self) -> Option<(Vector, Vector)> {
        match self {
            ConvexSet::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            ConvexSet::Ball { center, radius } => {
                Some((center.map(|c| c - radius), center.map(|c| c + radius)))
            }
            ConvexSet::Intersection { members } => {
                members.iter().filter_map(|m| m.bounding_box()).reduce(|(l1, u1), (l2, u2)| {
                    (l1.zip_map(&l2, f64::max), u1.zip_map(&u2, f64::min))
                })
            }
            _ => None,
        }
    }

    /// Metric projection `P(x)`; see [`project`].
    pub fn project(&self, x: &Vector) -> Result<Vector, SetError> {
        project(self, x)
    }

    /// Closed-form projection of `src` written into `dst`. Intersections are
    /// not handled here.
    fn project_slice(&self, src: &[f64], dst: &mut [f64]) -> Result<(), SetError> {
        match self {
            ConvexSet::WholeSpace { .. } => dst.copy_from_slice(src),
            ConvexSet::Box { lower, upper } => {
                for (i, (d, s)) in dst.iter_mut().zip(src).enumerate() {
                    *d = s.clamp(lower[i], upper[i]);
                }
            }
            ConvexSet::Ball { center, radius } => {
                let dist = src
                    .iter()
                    .zip(center.iter())
                    .map(|(s, c)| (s - c) * (s - c))
                    .sum::<f64>()
                    .sqrt();
                if dist <= *radius {
                    dst.copy_from_slice(src);
                } else {
                    let k = radius / dist;
                    for ((d, s), c) in dst.iter_mut().zip(src).zip(center.iter()) {
                        *d = c + k * (s - c);
                    }
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                let nn = normal.norm_sq();
                if nn.sqrt() < DEGENERATE_NORMAL {
                    if *offset < -DEGENERATE_NORMAL {
                        return Err(SetError::Empty("halfspace with zero normal and negative offset".into()));
                    }
                    dst.copy_from_slice(src);
                    return Ok(());
                }
                let excess = normal.iter().zip(src).map(|(a, s)| a * s).sum::<f64>() - offset;
                if excess <= 0.0 {
                    dst.copy_from_slice(src);
                } else {
                    let k = excess / nn;
                    for ((d, s), a) in dst.iter_mut().zip(src).zip(normal.iter()) {
                        *d = s - k * a;
                    }
                }
            }
            ConvexSet::Intersection { members } => {
                let p = project_intersection(
                    members,
                    &Vector::from_raw(src.to_vec()),
                    DYKSTRA_TOL,
                    DYKSTRA_MAX_SWEEPS,
                )?;
                dst.copy_from_slice(p.as_slice());
            }
        }
        Ok(())
    }
}

/// Metric projection onto `set`.
///
/// Closed form for whole space, boxes, balls and halfspaces; Dykstra with the
/// default tolerance for intersections.
pub fn project(set: &ConvexSet, x: &Vector) -> Result<Vector, SetError> {
    if set.dim() != x.dim() {
        return Err(SetError::DimensionMismatch { expected: set.dim(), found: x.dim() });
    }
    set.validate()?;
    if let ConvexSet::Intersection { members } = set {
        return project_intersection(members, x, DYKSTRA_TOL, DYKSTRA_MAX_SWEEPS);
    }
    let mut out = vec![0.0; x.dim()];
    set.project_slice(x.as_slice(), &mut out)?;
    Ok(Vector::from_raw(out))
}

/// Projection onto `⋂ members` by Dykstra's algorithm.
///
/// Sweeps over the members, carrying one correction vector per member, and
/// stops once a full sweep moves both the iterate and the corrections less
/// than `tol`. If `max_sweeps` runs out and the iterate still violates some
/// member by more than `10·tol`, the intersection is reported as possibly
/// empty.
pub fn project_intersection(
    members: &[ConvexSet],
    x: &Vector,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vector, SetError> {
    if members.is_empty() {
        return Err(SetError::Invalid("intersection needs at least one member".into()));
    }
    let n = x.dim();
    for m in members {
        if m.dim() != n {
            return Err(SetError::DimensionMismatch { expected: m.dim(), found: n });
        }
    }
    // unconstrained members never move the iterate
    let active: Vec<&ConvexSet> = members.iter().filter(|m| !m.is_whole_space()).collect();
    for m in members.iter().filter(|m| m.is_whole_space()) {
        m.validate()?;
    }
    match active.len() {
        0 => return Ok(x.clone()),
        1 => return project(active[0], x),
        _ => {}
    }

    let mut cur = x.as_slice().to_vec();
    let mut start = vec![0.0; n];
    let mut shifted = vec![0.0; n];
    // corrections stay empty until a member first moves the iterate
    let mut corrections: Vec<Option<Vec<f64>>> = vec![None; active.len()];

    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        start.copy_from_slice(&cur);
        let mut shift_change = 0.0;
        for (set, corr) in active.iter().zip(corrections.iter_mut()) {
            match corr {
                Some(p) => {
                    for ((s, c), pi) in shifted.iter_mut().zip(&cur).zip(p.iter()) {
                        *s = c + pi;
                    }
                }
                None => shifted.copy_from_slice(&cur),
            }
            set.project_slice(&shifted, &mut cur)?;
            let moved = shifted.iter().zip(&cur).any(|(s, c)| s != c);
            match corr {
                Some(p) => {
                    for ((pi, s), c) in p.iter_mut().zip(&shifted).zip(&cur) {
                        let next = s - c;
                        shift_change += (next - *pi) * (next - *pi);
                        *pi = next;
                    }
                }
                None if moved => {
                    let p: Vec<f64> = shifted.iter().zip(&cur).map(|(s, c)| s - c).collect();
                    shift_change += p.iter().map(|v| v * v).sum::<f64>();
                    *corr = Some(p);
                }
                None => {}
            }
        }
        let step = start
            .iter()
            .zip(&cur)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        // the iterate can stall while the corrections still drift, and an
        // empty intersection can make sweeps cycle with zero displacement
        if step < tol && shift_change.sqrt() < tol {
            let at = Vector::from_raw(cur.clone());
            if active.iter().all(|m| m.violation(&at) <= 10.0 * tol) {
                return Ok(at);
            }
        }
    }

    let result = Vector::from_raw(cur);
    let worst = members.iter().map(|m| m.violation(&result)).fold(0.0, f64::max);
    if worst <= 10.0 * tol {
        Ok(result)
    } else {
        Err(SetError::NonConvergence { sweeps, worst_violation: worst })
    }
}

/// The halfspace `{r : ‖a − r‖ ≤ ‖b − r‖}`.
///
/// Encoded as `{r : ⟨2(b − a), r⟩ ≤ ⟨b − a, a + b⟩}`; the offset form keeps
/// the cut accurate when `a` and `b` nearly coincide. For `a = b` the normal
/// is zero and the offset 0, i.e. the whole space.
pub fn halfspace_dominates(a: &Vector, b: &Vector) -> ConvexSet {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch in halfspace_dominates");
    let diff = b - a;
    let offset = diff.dot(&(a + b));
    ConvexSet::Halfspace { normal: diff.scale(2.0), offset }
}

/// A nonexpansive self-map of ℝⁿ assembled from projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub enum NonexpansiveMap {
    Identity { dim: usize },
    /// `P_B`; its fixed-point set is `B`.
    ProjectionOnto { set: ConvexSet },
    /// `(1 − θ)I + θ·base`, θ ∈ (0, 1].
    Averaged { theta: f64, base: Box<NonexpansiveMap> },
    /// `outer ∘ inner`
    Composition { outer: Box<NonexpansiveMap>, inner: Box<NonexpansiveMap> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawMap {
    Identity { dim: usize },
    Projection { set: ConvexSet },
    Averaged { theta: f64, base: Box<NonexpansiveMap> },
    Composition { outer: Box<NonexpansiveMap>, inner: Box<NonexpansiveMap> },
}

impl TryFrom<RawMap> for NonexpansiveMap {
    type Error = SetError;

    fn try_from(raw: RawMap) -> Result<Self, SetError> {
        let map = match raw {
            RawMap::Identity { dim } => NonexpansiveMap::Identity { dim },
            RawMap::Projection { set } => NonexpansiveMap::ProjectionOnto { set },
            RawMap::Averaged { theta, base } => NonexpansiveMap::Averaged { theta, base },
            RawMap::Composition { outer, inner } => NonexpansiveMap::Composition { outer, inner },
        };
        map.validate()?;
        Ok(map)
    }
}

impl From<NonexpansiveMap> for RawMap {
    fn from(map: NonexpansiveMap) -> Self {
        match map {
            NonexpansiveMap::Identity { dim } => RawMap::Identity { dim },
            NonexpansiveMap::ProjectionOnto { set } => RawMap::Projection { set },
            NonexpansiveMap::Averaged { theta, base } => RawMap::Averaged { theta, base },
            NonexpansiveMap::Composition { outer, inner } => RawMap::Composition { outer, inner },
        }
    }
}

impl NonexpansiveMap {
    pub fn identity(dim: usize) -> Self {
        NonexpansiveMap::Identity { dim }
    }

    pub fn projection(set: ConvexSet) -> Self {
        NonexpansiveMap::ProjectionOnto { set }
    }

    pub fn averaged(theta: f64, base: NonexpansiveMap) -> Result<Self, SetError> {
        let m = NonexpansiveMap::Averaged { theta, base: Box::new(base) };
        m.validate()?;
        Ok(m)
    }

    pub fn compose(outer: NonexpansiveMap, inner: NonexpansiveMap) -> Result<Self, SetError> {
        let m = NonexpansiveMap::Composition { outer: Box::new(outer), inner: Box::new(inner) };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), SetError> {
        match self {
            NonexpansiveMap::Identity { dim } => {
                if *dim == 0 {
                    return Err(SetError::Invalid("identity of dimension 0".into()));
                }
            }
            NonexpansiveMap::ProjectionOnto { set } => set.validate()?,
            NonexpansiveMap::Averaged { theta, base } => {
                if !(*theta > 0.0 && *theta <= 1.0) {
                    return Err(SetError::Invalid(format!("averaging weight {theta} not in (0, 1]")));
                }
                base.validate()?;
            }
            NonexpansiveMap::Composition { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                if outer.dim() != inner.dim() {
                    return Err(SetError::DimensionMismatch {
                        expected: outer.dim(),
                        found: inner.dim(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            NonexpansiveMap::Identity { dim } => *dim,
            NonexpansiveMap::ProjectionOnto { set } => set.dim(),
            NonexpansiveMap::Averaged { base, .. } => base.dim(),
            NonexpansiveMap::Composition { inner, .. } => inner.dim(),
        }
    }

    /// True when the map is the identity by construction; such maps return
    /// their argument unchanged, bit for bit.
    pub fn is_identity(&self) -> bool {
        match self {
            NonexpansiveMap::Identity { .. } => true,
            NonexpansiveMap::ProjectionOnto { set } => set.is_whole_space(),
            NonexpansiveMap::Averaged { base, .. } => base.is_identity(),
            NonexpansiveMap::Composition { outer, inner } => outer.is_identity() && inner.is_identity(),
        }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector, SetError> {
        map_apply(self, x)
    }
}

/// Evaluates `S(x)`.
pub fn map_apply(map: &NonexpansiveMap, x: &Vector) -> Result<Vector, SetError> {
    if map.dim() != x.dim() {
        return Err(SetError::DimensionMismatch { expected: map.dim(), found: x.dim() });
    }
    if map.is_identity() {
        return Ok(x.clone());
    }
    match map {
        NonexpansiveMap::Identity { .. } => Ok(x.clone()),
        NonexpansiveMap::ProjectionOnto { set } => project(set, x),
        NonexpansiveMap::Averaged { theta, base } => {
            let bx = map_apply(base, x)?;
            Ok(x.lerp(*theta, &bx))
        }
        NonexpansiveMap::Composition { outer, inner } => map_apply(outer, &map_apply(inner, x)?),
    }
}

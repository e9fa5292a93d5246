//! Exhaustive grid oracle for the resolvent in one or two dimensions.
//!
//! Independent of [`super::resolvent`]: it never iterates, it only evaluates
//! the defining inequality `g(w, v) + (1/α)⟨v − w, w − u⟩ ≥ 0` on grid pairs
//! and keeps the candidate whose worst violation is smallest.

use super::{Bifunction, EquilibriumError};
use crate::linalg::Vector;
use crate::sets::ConvexSet;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOracle {
    pub point: Vector,
    /// largest grid step along any axis at the finest level
    pub spacing: f64,
    /// worst violation of the defining inequality at `point`
    pub worst_violation: f64,
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 || hi == lo {
        return vec![0.5 * (lo + hi)];
    }
    let h = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { hi } else { lo + h * i as f64 })
        .collect()
}

fn grid(lower: &Vector, upper: &Vector, points: usize, q: &ConvexSet) -> Vec<Vector> {
    let axes: Vec<Vec<f64>> =
        (0..lower.dim()).map(|i| linspace(lower[i], upper[i], points)).collect();
    let raw: Vec<Vector> = match axes.len() {
        1 => axes[0].iter().map(|&a| Vector::from_raw(vec![a])).collect(),
        _ => axes[0]
            .iter()
            .flat_map(|&a| axes[1].iter().map(move |&b| Vector::from_raw(vec![a, b])))
            .collect(),
    };
    raw.into_iter().filter(|p| q.contains(p, 1e-12)).collect()
}

fn worst_violation(g: &Bifunction, alpha: f64, u: &Vector, w: &Vector, vs: &[Vector]) -> f64 {
    let pull = w - u;
    vs.iter()
        .map(|v| -g.eval(w, v) - (v - w).dot(&pull) / alpha)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn best_candidate(
    g: &Bifunction,
    alpha: f64,
    u: &Vector,
    candidates: &[Vector],
    tests: &[Vector],
) -> Option<(Vector, f64)> {
    candidates
        .iter()
        .map(|w| (w, worst_violation(g, alpha, u, w, tests)))
        .fold(None, |best: Option<(&Vector, f64)>, (w, viol)| match best {
            Some((_, b)) if b <= viol => best,
            _ => Some((w, viol)),
        })
        .map(|(w, viol)| (w.clone(), viol))
}

fn checked_bounds(q: &ConvexSet, u: &Vector) -> Result<(Vector, Vector), EquilibriumError> {
    if q.dim() > 2 {
        return Err(EquilibriumError::OracleUnsupported(format!(
            "dimension {} exceeds 2",
            q.dim()
        )));
    }
    if u.dim() != q.dim() {
        return Err(EquilibriumError::DimensionMismatch { expected: q.dim(), found: u.dim() });
    }
    q.bounding_box()
        .ok_or_else(|| EquilibriumError::OracleUnsupported("constraint set is unbounded".into()))
}

/// Scans a uniform grid with `grid_points` nodes per axis over `Q` and
/// returns the node minimizing the worst violation over all grid `v`.
/// Cost is quadratic in the number of nodes.
pub fn resolvent_oracle(
    g: &Bifunction,
    q: &ConvexSet,
    alpha: f64,
    u: &Vector,
    grid_points: usize,
) -> Result<GridOracle, EquilibriumError> {
    resolvent_oracle_refined(g, q, alpha, u, grid_points, 0)
}

/// [`resolvent_oracle`] followed by `levels` zoom passes, each scanning a
/// fresh `grid_points`-per-axis grid over the two cells around the current
/// best node. The test points `v` stay on the level-0 grid, which contains
/// every corner of the bounding box.
pub fn resolvent_oracle_refined(
    g: &Bifunction,
    q: &ConvexSet,
    alpha: f64,
    u: &Vector,
    grid_points: usize,
    levels: usize,
) -> Result<GridOracle, EquilibriumError> {
    if !(alpha > 0.0) {
        return Err(EquilibriumError::NonPositiveParameter(alpha));
    }
    if grid_points < 2 {
        return Err(EquilibriumError::OracleUnsupported("need at least 2 grid points per axis".into()));
    }
    let (lower, upper) = checked_bounds(q, u)?;
    let tests = grid(&lower, &upper, grid_points, q);
    let mut step = (0..lower.dim())
        .map(|i| (upper[i] - lower[i]) / (grid_points - 1) as f64)
        .fold(0.0, f64::max);
    let (mut point, mut worst) = best_candidate(g, alpha, u, &tests, &tests)
        .ok_or_else(|| EquilibriumError::OracleUnsupported("grid misses the constraint set".into()))?;

    for _ in 0..levels {
        let lo = point.zip_map(&lower, |p, l| (p - step).max(l));
        let hi = point.zip_map(&upper, |p, u| (p + step).min(u));
        let mut candidates = grid(&lo, &hi, grid_points, q);
        candidates.push(point.clone());
        if let Some((p, w)) = best_candidate(g, alpha, u, &candidates, &tests) {
            point = p;
            worst = w;
        }
        step = (0..lo.dim())
            .map(|i| (hi[i] - lo[i]) / (grid_points - 1) as f64)
            .fold(0.0, f64::max);
    }

    Ok(GridOracle { point, spacing: step, worst_violation: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::Monotonicity;
    use crate::linalg::DenseOperator;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn zero_bifunction_gives_projection_on_grid() {
        let q = ConvexSet::cube(1, 0.0, 1.0).unwrap();
        let r = resolvent_oracle(&Bifunction::zero(1), &q, 1.0, &v(&[2.0]), 101).unwrap();
        assert_eq!(r.point, v(&[1.0]));
    }

    #[test]
    fn two_dimensional_ball() {
        let q = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let r = resolvent_oracle(&Bifunction::zero(2), &q, 1.0, &v(&[0.2, -0.3]), 41).unwrap();
        assert!(r.point.dist(&v(&[0.2, -0.3])) <= r.spacing * 1.5);
    }

    #[test]
    fn refinement_shrinks_spacing() {
        let g = Bifunction::vi_affine(DenseOperator::identity(1), v(&[-0.3]), Monotonicity::Monotone)
            .unwrap();
        let q = ConvexSet::cube(1, -1.0, 1.0).unwrap();
        let coarse = resolvent_oracle(&g, &q, 2.0, &v(&[0.9]), 201).unwrap();
        let fine = resolvent_oracle_refined(&g, &q, 2.0, &v(&[0.9]), 201, 2).unwrap();
        assert!(fine.spacing < coarse.spacing / 50.0);
        assert!((fine.point[0] - 0.5).abs() <= fine.spacing);
    }

    #[test]
    fn unsupported_inputs() {
        let g = Bifunction::zero(3);
        let q = ConvexSet::cube(3, 0.0, 1.0).unwrap();
        assert!(matches!(
            resolvent_oracle(&g, &q, 1.0, &v(&[0.0, 0.0, 0.0]), 5),
            Err(EquilibriumError::OracleUnsupported(_))
        ));
        let g = Bifunction::zero(1);
        assert!(matches!(
            resolvent_oracle(&g, &ConvexSet::whole(1), 1.0, &v(&[0.0]), 5),
            Err(EquilibriumError::OracleUnsupported(_))
        ));
    }
}

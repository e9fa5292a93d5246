//! Numerical checks of the inequalities the convergence proofs rest on.
//! Each audit returns the worst violation over the run (0 when clean).

use super::{IterateRecord, StrongState};
use crate::linalg::Vector;
use crate::sets::ConvexSet;

/// Worst break of the chain `‖x_{k+1} − x*‖ ≤ ‖t − x*‖ ≤ ‖z − x*‖ ≤ ‖x − x*‖`.
pub fn fejer_audit(history: &[IterateRecord], x_star: &Vector) -> f64 {
    history
        .iter()
        .map(|r| {
            let chain = [
                r.next_x.dist(x_star),
                r.t.dist(x_star),
                r.z.dist(x_star),
                r.x.dist(x_star),
            ];
            chain.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Worst violation of
/// `‖z − x*‖² ≤ ‖x − x*‖² − (1 − 2λc₁)‖x − y‖² − (1 − 2λc₂)‖y − z‖²`.
pub fn extragradient_audit(history: &[IterateRecord], x_star: &Vector, c1: f64, c2: f64) -> f64 {
    history
        .iter()
        .map(|r| {
            let rhs = r.x.dist(x_star).powi(2)
                - (1.0 - 2.0 * r.lambda * c1) * r.x.dist(&r.y).powi(2)
                - (1.0 - 2.0 * r.lambda * c2) * r.y.dist(&r.z).powi(2);
            r.z.dist(x_star).powi(2) - rhs
        })
        .fold(0.0, f64::max)
}

/// Worst signed distance by which `x*` lies outside an accumulated cut.
pub fn cut_audit(state: &StrongState, x_star: &Vector) -> f64 {
    state
        .cuts()
        .iter()
        .map(|cut| match cut {
            ConvexSet::Halfspace { normal, offset } => {
                let nn = normal.norm();
                if nn == 0.0 {
                    0.0
                } else {
                    (normal.dot(x_star) - offset) / nn
                }
            }
            other => other.violation(x_star),
        })
        .fold(0.0, f64::max)
}

/// Worst decrease of `‖x^k − x¹‖` along the run.
pub fn anchor_monotonicity_audit(history: &[IterateRecord], x1: &Vector) -> f64 {
    history
        .iter()
        .map(|r| r.x.dist(x1) - r.next_x.dist(x1))
        .fold(0.0, f64::max)
}

/// Worst violation of `‖x^m − x^n‖² ≤ ‖x^m − x¹‖² − ‖x^n − x¹‖²` over
/// pairs `m > n` of recorded iterates (every `stride`-th one).
pub fn cauchy_audit(history: &[IterateRecord], x1: &Vector, stride: usize) -> f64 {
    let points: Vec<&Vector> = history
        .iter()
        .step_by(stride.max(1))
        .map(|r| &r.next_x)
        .chain(history.last().map(|r| &r.next_x))
        .collect();
    let mut worst: f64 = 0.0;
    for (i, xn) in points.iter().enumerate() {
        for xm in &points[i + 1..] {
            let lhs = xm.dist(xn).powi(2);
            let rhs = xm.dist(x1).powi(2) - xn.dist(x1).powi(2);
            worst = worst.max(lhs - rhs);
        }
    }
    worst
}

//! Exact projection onto polyhedra by a dual active-set method
//! (Goldfarb–Idnani with identity Hessian).

use super::{ConvexSet, SetError, DEGENERATE_NORMAL};
use crate::linalg::Vector;

/// `‖z‖` below which a new normal counts as dependent on the active ones.
const DEPENDENT: f64 = 1e-10;

/// Constraints `⟨a_i, r⟩ ≤ b_i` with unit normals, stored row-major.
#[derive(Debug, Clone, PartialEq)]
struct Rows {
    dim: usize,
    normals: Vec<f64>,
    offsets: Vec<f64>,
}

impl Rows {
    fn new(dim: usize) -> Self {
        Rows { dim, normals: Vec::new(), offsets: Vec::new() }
    }

    fn push(&mut self, normal: &[f64], offset: f64, slack: f64) {
        let nn = dot(normal, normal).sqrt();
        if nn < DEGENERATE_NORMAL {
            return;
        }
        self.normals.extend(normal.iter().map(|a| a / nn));
        self.offsets.push(offset / nn + slack);
    }

    /// False for a non-polyhedral member.
    fn collect(&mut self, set: &ConvexSet, slack: f64) -> bool {
        match set {
            ConvexSet::WholeSpace { .. } => true,
            ConvexSet::Box { lower, upper } => {
                let n = lower.dim();
                for i in 0..n {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    self.push(&e, upper[i], slack);
                    e[i] = -1.0;
                    self.push(&e, -lower[i], slack);
                }
                true
            }
            ConvexSet::Halfspace { normal, offset } => {
                self.push(normal.as_slice(), *offset, slack);
                true
            }
            ConvexSet::Intersection { members } => members.iter().all(|m| self.collect(m, slack)),
            ConvexSet::Ball { .. } => false,
        }
    }

    fn truncate(&mut self, len: usize) {
        self.offsets.truncate(len);
        self.normals.truncate(len * self.dim);
    }

    fn len(&self) -> usize {
        self.offsets.len()
    }

    fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.dim..(i + 1) * self.dim]
    }

    fn excess(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.normal(i), x) - self.offsets[i]
    }

    fn worst_excess(&self, x: &[f64]) -> f64 {
        (0..self.len()).map(|i| self.excess(i, x)).fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `N = Q·R` for the active normals, Gram–Schmidt applied twice.
struct Factor {
    q: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
}

impl Factor {
    fn build(rows: &Rows, active: &[usize]) -> Factor {
        let k = active.len();
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut r = vec![vec![0.0; k]; k];
        for (j, &idx) in active.iter().enumerate() {
            let mut v = rows.normal(idx).to_vec();
            for _ in 0..2 {
                for (i, qi) in q.iter().enumerate() {
                    let c = dot(qi, &v);
                    r[i][j] += c;
                    for (vk, qk) in v.iter_mut().zip(qi) {
                        *vk -= c * qk;
                    }
                }
            }
            let nv = dot(&v, &v).sqrt();
            r[j][j] = nv;
            q.push(v.into_iter().map(|x| x / nv).collect());
        }
        Factor { q, r }
    }

    /// `(a − QQᵀa, R⁻¹Qᵀa)`
    fn split(&self, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut z = a.to_vec();
        let mut c = vec![0.0; self.q.len()];
        for _ in 0..2 {
            for (ci, qi) in c.iter_mut().zip(&self.q) {
                let d = dot(qi, &z);
                *ci += d;
                for (zk, qk) in z.iter_mut().zip(qi) {
                    *zk -= d * qk;
                }
            }
        }
        let k = c.len();
        let mut w = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| self.r[i][j] * w[j]).sum();
            w[i] = (c[i] - s) / self.r[i][i];
        }
        (z, w)
    }
}

/// Dual active-set projector of a fixed anchor onto a polyhedron that only
/// ever shrinks.
///
/// Adding constraints keeps the current multipliers dual feasible, so each
/// [`solve`](Self::solve) after [`add`](Self::add) resumes from the previous
/// optimum instead of starting over.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralProjector {
    anchor: Vec<f64>,
    rows: Rows,
    active: Vec<usize>,
    is_active: Vec<bool>,
    mult: Vec<f64>,
    cur: Vec<f64>,
    /// total distance `cur` has travelled
    moved: f64,
    /// `excess_i − moved` at the last exact evaluation of row i; since
    /// normals are unit, `bound_i + moved` caps the current excess
    bound: Vec<f64>,
}

impl PolyhedralProjector {
    pub fn new(anchor: &Vector) -> Self {
        PolyhedralProjector {
            anchor: anchor.as_slice().to_vec(),
            rows: Rows::new(anchor.dim()),
            active: Vec::new(),
            is_active: Vec::new(),
            mult: Vec::new(),
            cur: anchor.as_slice().to_vec(),
            moved: 0.0,
            bound: Vec::new(),
        }
    }

    /// Intersects with `set`. Returns false, leaving the projector unchanged,
    /// if `set` is not polyhedral.
    pub fn add(&mut self, set: &ConvexSet) -> Result<bool, SetError> {
        self.add_relaxed(set, 0.0)
    }

    /// [`add`](Self::add) with every face of `set` pushed outward by `slack`.
    pub fn add_relaxed(&mut self, set: &ConvexSet, slack: f64) -> Result<bool, SetError> {
        if set.dim() != self.anchor.len() {
            return Err(SetError::DimensionMismatch { expected: set.dim(), found: self.anchor.len() });
        }
        set.validate()?;
        let before = self.rows.len();
        if self.rows.collect(set, slack) {
            self.is_active.resize(self.rows.len(), false);
            self.bound.resize(self.rows.len(), f64::INFINITY);
            Ok(true)
        } else {
            self.rows.truncate(before);
            Ok(false)
        }
    }

    pub fn constraint_count(&self) -> usize {
        self.rows.len()
    }

    /// Projection of the anchor onto every constraint added so far; none is
    /// violated by more than `tol` (rows have unit normals).
    ///
    /// A warm start that breaks down numerically (a nearly dependent active
    /// set can make a feasible polyhedron look empty) is retried once from
    /// scratch before an error is returned.
    pub fn solve(&mut self, tol: f64) -> Result<Vector, SetError> {
        if self.active.is_empty() {
            return self.solve_from_current(tol);
        }
        match self.solve_from_current(tol) {
            Ok(x) => Ok(x),
            Err(_) => {
                self.restart();
                self.solve_from_current(tol)
            }
        }
    }

    fn restart(&mut self) {
        self.active.clear();
        self.mult.clear();
        self.is_active.iter_mut().for_each(|a| *a = false);
        self.bound.iter_mut().for_each(|b| *b = f64::INFINITY);
        self.cur.copy_from_slice(&self.anchor);
    }

    fn solve_from_current(&mut self, tol: f64) -> Result<Vector, SetError> {
        let budget = 50 * (self.rows.len() + self.anchor.len()) + 100;
        let mut steps = 0usize;
        loop {
            let Some(p) = self.most_violated(tol) else {
                self.refresh();
                return Ok(Vector::from_raw(self.cur.clone()));
            };
            let mut mult_p = 0.0;
            loop {
                steps += 1;
                if steps > budget {
                    return Err(SetError::NonConvergence {
                        sweeps: steps,
                        worst_violation: self.rows.worst_excess(&self.cur),
                    });
                }
                let (z, w) = Factor::build(&self.rows, &self.active).split(&self.rows.normal(p));
                let zz = dot(&z, &z);
                let dependent = zz.sqrt() < DEPENDENT;
                let full = if dependent { f64::INFINITY } else { self.rows.excess(p, &self.cur) / zz };
                let partial = w
                    .iter()
                    .zip(&self.mult)
                    .enumerate()
                    .filter(|(_, (wj, _))| **wj > 0.0)
                    .map(|(j, (wj, mj))| (j, mj / wj))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                let step = match partial {
                    Some((_, tp)) if tp < full => tp,
                    _ if full.is_finite() => full,
                    _ => {
                        return Err(SetError::Empty(format!(
                            "polyhedral intersection is empty (violation {:.3e})",
                            self.rows.excess(p, &self.cur)
                        )));
                    }
                };
                if !dependent {
                    for (c, zi) in self.cur.iter_mut().zip(&z) {
                        *c -= step * zi;
                    }
                    self.moved += step * zz.sqrt();
                }
                for (mj, wj) in self.mult.iter_mut().zip(&w) {
                    *mj -= step * wj;
                }
                mult_p += step;
                if step == full {
                    self.is_active[p] = true;
                    self.active.push(p);
                    self.mult.push(mult_p);
                    break;
                }
                if let Some((drop, _)) = partial {
                    self.is_active[self.active[drop]] = false;
                    self.bound[self.active[drop]] = f64::INFINITY;
                    self.active.remove(drop);
                    self.mult.remove(drop);
                }
            }
        }
    }

    /// Recomputes the iterate from the multipliers, `x = x¹ − Σ λ_j a_j`,
    /// so rounding does not pile up across warm starts.
    fn refresh(&mut self) {
        let mut x = self.anchor.clone();
        for (&j, &m) in self.active.iter().zip(&self.mult) {
            for (c, a) in x.iter_mut().zip(self.rows.normal(j)) {
                *c -= m * a;
            }
        }
        self.moved += x.iter().zip(&self.cur).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.cur = x;
    }

    /// Inactive row with the largest excess above `tol`. Rows whose cached
    /// bound already rules out a violation are not evaluated.
    fn most_violated(&mut self, tol: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows.len() {
            if self.is_active[i] || self.bound[i] + self.moved <= tol {
                continue;
            }
            let e = self.rows.excess(i, &self.cur);
            self.bound[i] = e - self.moved;
            if e > tol && best.is_none_or(|(_, b)| e > b) {
                best = Some((i, e));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Exact projection of `x` onto the intersection of `members`, or `Ok(None)`
/// when some member is not polyhedral (a ball, possibly nested).
pub fn project_polyhedral(members: &[ConvexSet], x: &Vector, tol: f64) -> Result<Option<Vector>, SetError> {
    let mut proj = PolyhedralProjector::new(x);
    for m in members {
        if !proj.add(m)? {
            return Ok(None);
        }
    }
    proj.solve(tol).map(Some)
}

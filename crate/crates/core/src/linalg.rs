//! Finite-dimensional real Hilbert-space primitives.
//!
//! [`Vector`] is a dense point of ℝⁿ and [`DenseOperator`] a dense m×n
//! matrix acting as a bounded linear map ℝⁿ → ℝᵐ together with its adjoint.
//! The checked free functions ([`inner`], [`apply`], [`adjoint_apply`])
//! report dimension mismatches as errors; the arithmetic operator impls on
//! `&Vector` panic on mismatch the way `ndarray` broadcasting does.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vectors must have at least one component")]
    Empty,
    #[error("non-finite component at index {index}")]
    NonFinite { index: usize },
    #[error("operator rows have inconsistent lengths (row {row} has {found}, expected {expected})")]
    Ragged { row: usize, expected: usize, found: usize },
}

fn check_dim(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, found })
    }
}

/// A point of ℝⁿ with finite components, n ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self, LinalgError> {
        if components.is_empty() {
            return Err(LinalgError::Empty);
        }
        if let Some(index) = components.iter().position(|c| !c.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Vector(components))
    }

    /// Arithmetic results skip the finiteness check; the solver guards
    /// against blow-up separately.
    pub(crate) fn from_raw(components: Vec<f64>) -> Self {
        debug_assert!(!components.is_empty());
        Vector(components)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector::from_raw(vec![0.0; dim.max(1)])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Vector::from_raw(vec![value; dim.max(1)])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim.max(1)];
        v[i] = 1.0;
        Vector::from_raw(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Unchecked inner product; panics on dimension mismatch.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dot");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dist");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        self.map(|c| c * s)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        self.zip_map(other, |a, b| a + s * b)
    }

    /// `(1 − θ)·self + θ·other`
    pub fn lerp(&self, theta: f64, other: &Vector) -> Vector {
        self.zip_map(other, |a, b| (1.0 - theta) * a + theta * b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector::from_raw(self.0.iter().map(|&c| f(c)).collect())
    }

    pub fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Vector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Vector::from_raw(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = LinalgError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;

    fn mul(self, s: f64) -> Vector {
        self.scale(s)
    }
}

impl Neg for &Vector {
    type Output = Vector;

    fn neg(self) -> Vector {
        self.map(|c| -c)
    }
}

/// Checked inner product ⟨u, v⟩.
pub fn inner(u: &Vector, v: &Vector) -> Result<f64, LinalgError> {
    check_dim(u.dim(), v.dim())?;
    Ok(u.dot(v))
}

/// Dense real m×n matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DenseOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseOperator {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        let m = rows.len();
        if m == 0 {
            return Err(LinalgError::Empty);
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        let mut data = Vec::with_capacity(m * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::Ragged { row: i, expected: n, found: row.len() });
            }
            data.extend(row);
        }
        if let Some(index) = data.iter().position(|c| !c.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(DenseOperator { rows: m, cols: n, data })
    }

    /// Builds an m×n operator from a generator `entry(i, j)`.
    pub fn from_fn(rows: usize, cols: usize, entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entry = entry;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(entry(i, j));
            }
        }
        DenseOperator { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| 0.0)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// (m, n): maps dim-n vectors to dim-m vectors.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> DenseOperator {
        DenseOperator::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `selfᵀ · other`
    pub fn gram_with(&self, other: &DenseOperator) -> DenseOperator {
        assert_eq!(self.rows, other.rows);
        DenseOperator::from_fn(self.cols, other.cols, |i, j| {
            (0..self.rows).map(|k| self.get(k, i) * other.get(k, j)).sum()
        })
    }

    pub fn add_diagonal(&self, shift: f64) -> DenseOperator {
        DenseOperator::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) + if i == j { shift } else { 0.0 }
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0.0)
    }

    /// Unchecked product; panics on mismatch.
    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.cols, "dimension mismatch in apply");
        Vector::from_raw(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// Unchecked transpose product; panics on mismatch.
    pub fn tr_mul_vec(&self, y: &Vector) -> Vector {
        assert_eq!(y.dim(), self.rows, "dimension mismatch in adjoint_apply");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Vector::from_raw(out)
    }
}

impl TryFrom<Vec<Vec<f64>>> for DenseOperator {
    type Error = LinalgError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        DenseOperator::from_rows(rows)
    }
}

impl From<DenseOperator> for Vec<Vec<f64>> {
    fn from(a: DenseOperator) -> Self {
        a.to_rows()
    }
}

/// Checked matrix-vector product `A x`.
pub fn apply(a: &DenseOperator, x: &Vector) -> Result<Vector, LinalgError> {
    check_dim(a.cols, x.dim())?;
    Ok(a.mul_vec(x))
}

/// Checked adjoint action `A* y = Aᵀ y`.
pub fn adjoint_apply(a: &DenseOperator, y: &Vector) -> Result<Vector, LinalgError> {
    check_dim(a.rows, y.dim())?;
    Ok(a.tr_mul_vec(y))
}

pub const DEFAULT_POWER_ITERS: usize = 200;
pub const DEFAULT_NORM_SAFETY: f64 = 1.01;

/// Upper bound `U ≥ ‖A‖²` for step-size selection.
///
/// Power iteration on AᵀA from the all-ones vector (e₁ when all-ones lies in
/// the kernel), returning the final Rayleigh quotient times `safety`. The
/// safety factor absorbs any shortfall of the power method. A zero operator
/// yields `safety · f64::EPSILON` so that `1/U` stays finite.
pub fn operator_norm_sq_upper(a: &DenseOperator, iters: usize, safety: f64) -> f64 {
    assert!(iters >= 1, "iters must be at least 1");
    assert!(safety >= 1.0, "safety factor must be at least 1");
    let floor = safety * f64::EPSILON;
    if a.is_zero() {
        return floor;
    }

    let mut v = Vector::filled(a.cols, 1.0);
    if a.mul_vec(&v).norm_sq() == 0.0 {
        v = Vector::basis(a.cols, 0);
        if a.mul_vec(&v).norm_sq() == 0.0 {
            // pick any column that is not annihilated
            if let Some(j) = (0..a.cols).find(|&j| (0..a.rows).any(|i| a.get(i, j) != 0.0)) {
                v = Vector::basis(a.cols, j);
            }
        }
    }
    v = v.scale(1.0 / v.norm());

    let mut rayleigh = 0.0;
    for _ in 0..iters {
        let av = a.mul_vec(&v);
        rayleigh = av.norm_sq();
        let w = a.tr_mul_vec(&av);
        let wn = w.norm();
        if wn == 0.0 {
            break;
        }
        v = w.scale(1.0 / wn);
    }
    rayleigh = rayleigh.max(a.mul_vec(&v).norm_sq());
    (safety * rayleigh).max(floor)
}

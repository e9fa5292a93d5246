//! Problem instances: find `x* ∈ C` with `x* ∈ Sol(C, f) ∩ Fix(S)` and
//! `Ax* ∈ Sol(Q, g) ∩ Fix(T)`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{Bifunction, Monotonicity};
use crate::linalg::{DenseOperator, Vector};
use crate::sets::{ConvexSet, NonexpansiveMap};

mod generate;
mod verify;

pub use generate::{generate_planted, generate_planted_with, PlantedParams};
pub use verify::{verify_planted, PlantedReport};

/// Tolerance on `x1 ∈ C`.
pub const START_MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed problem file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("inconsistent problem: {0}")]
    Invalid(String),
    #[error("problem has no planted solution")]
    NoPlantedSolution,
}

/// A split equilibrium problem with nonexpansive mappings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "C")]
    pub c: ConvexSet,
    #[serde(rename = "Q")]
    pub q: ConvexSet,
    #[serde(rename = "A")]
    pub a: DenseOperator,
    pub f: Bifunction,
    pub g: Bifunction,
    #[serde(rename = "S")]
    pub s: NonexpansiveMap,
    #[serde(rename = "T")]
    pub t: NonexpansiveMap,
    pub x1: Vector,
    #[serde(default)]
    pub planted_solution: Option<Vector>,
}

impl ProblemSpec {
    /// Dimension of the primal space H₁.
    pub fn n(&self) -> usize {
        self.c.dim()
    }

    /// Dimension of the image space H₂.
    pub fn m(&self) -> usize {
        self.q.dim()
    }

    /// Checks dimensional consistency, `x1 ∈ C`, and that `g` is declared
    /// monotone.
    pub fn validate(&self) -> Result<(), ProblemError> {
        let (n, m) = (self.n(), self.m());
        let invalid = |what: &str, expected: usize, found: usize| {
            Err(ProblemError::Invalid(format!("{what} has dimension {found}, expected {expected}")))
        };
        let (rows, cols) = self.a.shape();
        if rows != m || cols != n {
            return Err(ProblemError::Invalid(format!(
                "A is {rows}x{cols}, expected {m}x{n} (dim Q x dim C)"
            )));
        }
        if self.f.dim() != n {
            return invalid("f", n, self.f.dim());
        }
        if self.g.dim() != m {
            return invalid("g", m, self.g.dim());
        }
        if self.s.dim() != n {
            return invalid("S", n, self.s.dim());
        }
        if self.t.dim() != m {
            return invalid("T", m, self.t.dim());
        }
        if self.x1.dim() != n {
            return invalid("x1", n, self.x1.dim());
        }
        if let Some(p) = &self.planted_solution {
            if p.dim() != n {
                return invalid("planted_solution", n, p.dim());
            }
        }
        for (name, c) in [("f", self.f.c1), ("f", self.f.c2), ("g", self.g.c1), ("g", self.g.c2)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(ProblemError::Invalid(format!("{name} has non-positive constant {c}")));
            }
        }
        if self.g.monotonicity != Monotonicity::Monotone {
            return Err(ProblemError::Invalid("g must be monotone".into()));
        }
        self.c.validate().map_err(|e| ProblemError::Invalid(format!("C: {e}")))?;
        self.q.validate().map_err(|e| ProblemError::Invalid(format!("Q: {e}")))?;
        let viol = self.c.violation(&self.x1);
        if viol > START_MEMBERSHIP_TOL {
            return Err(ProblemError::Invalid(format!("x1 lies outside C (violation {viol:.3e})")));
        }
        Ok(())
    }

    /// The same instance with `S` and `T` replaced by identities.
    pub fn with_identity_maps(&self) -> ProblemSpec {
        ProblemSpec {
            s: NonexpansiveMap::identity(self.n()),
            t: NonexpansiveMap::identity(self.m()),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String, ProblemError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<ProblemSpec, ProblemError> {
        let p: ProblemSpec = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}

/// Writes `p` as a JSON problem file. Reals are written in shortest
/// round-trip form, so [`load`] reproduces every field exactly.
pub fn save(p: &ProblemSpec, path: impl AsRef<Path>) -> Result<(), ProblemError> {
    let path = path.as_ref();
    let mut text = p.to_json()?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| ProblemError::Io { path: path.to_path_buf(), source })
}

pub fn load(path: impl AsRef<Path>) -> Result<ProblemSpec, ProblemError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ProblemError::Io { path: path.to_path_buf(), source })?;
    ProblemSpec::from_json(&text)
}

//! Solvers for split equilibrium problems with nonexpansive mappings.
//!
//! Given closed convex sets `C ⊂ ℝⁿ`, `Q ⊂ ℝᵐ`, a linear map `A`, a
//! pseudomonotone bifunction `f` on `C`, a monotone bifunction `g` on `Q`
//! and nonexpansive maps `S`, `T`, find `x* ∈ Sol(C, f) ∩ Fix(S)` with
//! `Ax* ∈ Sol(Q, g) ∩ Fix(T)`.
//!
//! * [`linalg`]: vectors, dense operators, operator-norm bounds
//! * [`sets`]: convex sets, projections, Dykstra, nonexpansive maps
//! * [`equilibrium`]: bifunctions, proximal steps, resolvents, oracles
//! * [`solver`]: the extragradient (weak) and shrinking-projection (strong)
//!   schemes with their audits
//! * [`problems`]: instances, the planted-solution generator, file format
//! * [`cli`]: the `sepnm` command line

pub mod cli;
pub mod equilibrium;
pub mod linalg;
pub mod problems;
pub mod sets;
pub mod solver;

pub use equilibrium::{Bifunction, Monotonicity};
pub use linalg::{DenseOperator, Vector};
pub use problems::{generate_planted, ProblemSpec};
pub use sets::{ConvexSet, NonexpansiveMap};
pub use solver::{solve, strong_solve, validate, weak_solve, Mode, SolveReport, SolverConfig, Status};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ProblemError, ProblemSpec};
use crate::equilibrium::assumptions::sample_point;
use crate::sets::map_apply;

/// Numerical membership of the planted point in the solution set.
///
/// Each field is a nonnegative violation. The equilibrium entries are
/// `max (−f(x*, v))⁺` over sampled `v ∈ C`, and the same for `g` at `Ax*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlantedReport {
    pub x1_in_c: f64,
    pub solution_in_c: f64,
    pub image_in_q: f64,
    pub s_fixed: f64,
    pub t_fixed: f64,
    pub f_equilibrium: f64,
    pub g_equilibrium: f64,
}

impl PlantedReport {
    pub fn worst(&self) -> f64 {
        [
            self.x1_in_c,
            self.solution_in_c,
            self.image_in_q,
            self.s_fixed,
            self.t_fixed,
            self.f_equilibrium,
            self.g_equilibrium,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Membership and fixed-point conditions to 1e-9, equilibrium residuals
    /// to 1e-8.
    pub fn is_clean(&self) -> bool {
        [self.x1_in_c, self.solution_in_c, self.image_in_q, self.s_fixed, self.t_fixed]
            .into_iter()
            .all(|v| v <= 1e-9)
            && self.f_equilibrium <= 1e-8
            && self.g_equilibrium <= 1e-8
    }
}

/// Checks the planted solution of `p` on `samples` random test points per
/// equilibrium condition.
pub fn verify_planted(p: &ProblemSpec, samples: usize, seed: u64) -> Result<PlantedReport, ProblemError> {
    let x_star = p.planted_solution.as_ref().ok_or(ProblemError::NoPlantedSolution)?;
    p.validate()?;
    let ax = p.a.mul_vec(x_star);
    let map_err = |e: crate::sets::SetError| ProblemError::Invalid(e.to_string());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f_eq: f64 = 0.0;
    let mut g_eq: f64 = 0.0;
    for _ in 0..samples {
        let v = sample_point(&p.c, &mut rng);
        f_eq = f_eq.max(-p.f.eval(x_star, &v));
        let w = sample_point(&p.q, &mut rng);
        g_eq = g_eq.max(-p.g.eval(&ax, &w));
    }

    Ok(PlantedReport {
        x1_in_c: p.c.violation(&p.x1),
        solution_in_c: p.c.violation(x_star),
        image_in_q: p.q.violation(&ax),
        s_fixed: map_apply(&p.s, x_star).map_err(map_err)?.dist(x_star),
        t_fixed: map_apply(&p.t, &ax).map_err(map_err)?.dist(&ax),
        f_equilibrium: f_eq.max(0.0),
        g_equilibrium: g_eq.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::problems::generate_planted;
    use crate::sets::{ConvexSet, NonexpansiveMap};

    #[test]
    fn generated_instances_verify() {
        for seed in 0..10 {
            let p = generate_planted(4, 3, seed);
            let r = verify_planted(&p, 200, seed).unwrap();
            assert!(r.is_clean() && r.worst() <= 1e-8, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn solution_outside_c_is_reported() {
        let mut p = generate_planted(2, 2, 3);
        p.planted_solution = Some(Vector::new(vec![9.0, 0.0]).unwrap());
        let r = verify_planted(&p, 50, 0).unwrap();
        assert!(r.solution_in_c > 0.0);
        assert!(!r.is_clean());
    }

    #[test]
    fn wrong_fixed_point_set_is_reported() {
        let mut p = generate_planted(2, 2, 3);
        let far = Vector::new(vec![4.0, 4.0]).unwrap();
        p.s = NonexpansiveMap::projection(ConvexSet::ball(far, 0.5).unwrap());
        let r = verify_planted(&p, 50, 0).unwrap();
        assert!(r.s_fixed > 1.0);
    }

    #[test]
    fn missing_planted_solution() {
        let mut p = generate_planted(2, 2, 3);
        p.planted_solution = None;
        assert!(matches!(verify_planted(&p, 10, 0), Err(ProblemError::NoPlantedSolution)));
    }
}

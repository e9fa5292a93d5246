//! Sampled checks of the standing assumptions on a bifunction.
//!
//! Only the finitely checkable conditions are tested: `f(x, x) = 0`,
//! monotonicity or pseudomonotonicity, and the Lipschitz-type inequality.
//! Hemicontinuity and joint weak continuity have no finite test; they hold
//! for affine VI bifunctions and are the caller's obligation otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{Bifunction, Monotonicity};
use crate::linalg::Vector;
use crate::sets::ConvexSet;

/// Worst violation of each sampled assumption; every field is ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `max |f(x, x)|`
    pub reflexive: f64,
    /// `max (f(x, y) + f(y, x))⁺`
    pub monotone: f64,
    /// `max f(y, x)⁺` over pairs with `f(x, y) ≥ 0`
    pub pseudomonotone: f64,
    /// `max (f(x, z) − c₁‖x−y‖² − c₂‖y−z‖² − f(x, y) − f(y, z))⁺`
    pub lipschitz: f64,
    pub samples: usize,
}

impl AssumptionReport {
    /// Whether every check relevant to `class` passes within the tolerances
    /// used throughout the crate (1e-10 for the sign conditions, 1e-8 for
    /// the Lipschitz-type bound).
    pub fn is_clean(&self, class: Monotonicity) -> bool {
        let order = match class {
            Monotonicity::Monotone => self.monotone,
            Monotonicity::Pseudomonotone => self.pseudomonotone,
        };
        self.reflexive <= 1e-10 && order <= 1e-10 && self.lipschitz <= 1e-8
    }
}

/// Draws a point of `domain` by projecting a Gaussian sample centered on
/// the domain's bounding box (unit scale around the origin when unbounded).
pub fn sample_point<R: Rng + ?Sized>(domain: &ConvexSet, rng: &mut R) -> Vector {
    let dim = domain.dim();
    let (center, scale) = match domain.bounding_box() {
        Some((lo, hi)) => (lo.zip_map(&hi, |a, b| 0.5 * (a + b)), lo.zip_map(&hi, |a, b| 0.5 * (b - a))),
        None => (Vector::zeros(dim), Vector::filled(dim, 1.0)),
    };
    let raw = Vector::from_raw(
        (0..dim)
            .map(|i| center[i] + scale[i] * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    );
    domain.project(&raw).unwrap_or(raw)
}

/// Evaluates every sampled assumption on `samples` random pairs and triples
/// from `domain`, deterministically in `seed`.
pub fn check_assumptions(
    f: &Bifunction,
    domain: &ConvexSet,
    samples: usize,
    seed: u64,
) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AssumptionReport {
        reflexive: 0.0,
        monotone: 0.0,
        pseudomonotone: 0.0,
        lipschitz: 0.0,
        samples,
    };
    for _ in 0..samples {
        let x = sample_point(domain, &mut rng);
        let y = sample_point(domain, &mut rng);
        let z = sample_point(domain, &mut rng);

        report.reflexive = report.reflexive.max(f.eval(&x, &x).abs());

        let fxy = f.eval(&x, &y);
        let fyx = f.eval(&y, &x);
        report.monotone = report.monotone.max(fxy + fyx);
        if fxy >= 0.0 {
            report.pseudomonotone = report.pseudomonotone.max(fyx);
        }
        if fyx >= 0.0 {
            report.pseudomonotone = report.pseudomonotone.max(fxy);
        }

        let slack = f.eval(&x, &y) + f.eval(&y, &z) - f.eval(&x, &z)
            + f.c1 * x.dist(&y).powi(2)
            + f.c2 * y.dist(&z).powi(2);
        report.lipschitz = report.lipschitz.max(-slack);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseOperator;

    #[test]
    fn identity_field_is_monotone() {
        let f = Bifunction::vi_affine(DenseOperator::identity(3), Vector::zeros(3), Monotonicity::Monotone)
            .unwrap();
        let c = ConvexSet::cube(3, -2.0, 2.0).unwrap();
        let r = check_assumptions(&f, &c, 500, 1);
        assert!(r.monotone <= 1e-12, "{r:?}");
        assert!(r.is_clean(Monotonicity::Monotone));
    }

    #[test]
    fn negative_identity_violates_monotonicity() {
        let f = Bifunction::vi_affine(
            DenseOperator::diagonal(&[-1.0, -1.0]),
            Vector::zeros(2),
            Monotonicity::Monotone,
        )
        .unwrap();
        let c = ConvexSet::cube(2, -1.0, 1.0).unwrap();
        let r = check_assumptions(&f, &c, 200, 3);
        assert!(r.monotone > 0.0);
        assert!(!r.is_clean(Monotonicity::Monotone));
    }

    #[test]
    fn zero_bifunction_is_clean() {
        let r = check_assumptions(&Bifunction::zero(2), &ConvexSet::cube(2, 0.0, 1.0).unwrap(), 100, 9);
        assert_eq!(r.reflexive, 0.0);
        assert_eq!(r.monotone, 0.0);
        assert_eq!(r.pseudomonotone, 0.0);
        assert_eq!(r.lipschitz, 0.0);
    }

    #[test]
    fn understated_constants_are_caught() {
        let f = Bifunction::vi_affine_with_constants(
            DenseOperator::from_rows(vec![vec![0.0, 4.0], vec![-4.0, 0.0]]).unwrap(),
            Vector::zeros(2),
            Monotonicity::Monotone,
            0.01,
            0.01,
        )
        .unwrap();
        let r = check_assumptions(&f, &ConvexSet::cube(2, -1.0, 1.0).unwrap(), 300, 5);
        assert!(r.lipschitz > 1e-8);
    }

    #[test]
    fn samples_stay_in_domain_and_are_reproducible() {
        let c = ConvexSet::ball(Vector::new(vec![3.0, -1.0]).unwrap(), 0.5).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(4);
        let mut b = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let p = sample_point(&c, &mut a);
            assert!(c.contains(&p, 1e-12));
            assert_eq!(p, sample_point(&c, &mut b));
        }
    }
}

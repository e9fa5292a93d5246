use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ProblemSpec;
use crate::equilibrium::{Bifunction, Monotonicity};
use crate::linalg::{DenseOperator, Vector};
use crate::sets::{project, ConvexSet, NonexpansiveMap};

/// Knobs of the planted-solution generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedParams {
    /// half-width of the boxes `C` and `Q` around their centers
    pub box_half_width: f64,
    /// `x*` is drawn uniformly from `[-r, r]ⁿ`, well inside `C`
    pub solution_radius: f64,
    /// strong-monotonicity floor δ of `M = RᵀR + δI`
    pub delta: f64,
    /// radius of the fixed-point balls of `S` and `T`
    pub fixed_ball_radius: f64,
    /// averaging weight of `S` and `T`
    pub map_theta: f64,
    /// distance of the start from `x*` before projection onto `C`
    pub start_offset: f64,
}

impl Default for PlantedParams {
    fn default() -> Self {
        PlantedParams {
            box_half_width: 5.0,
            solution_radius: 2.5,
            delta: 0.1,
            fixed_ball_radius: 1.0,
            map_theta: 0.5,
            start_offset: 2.0,
        }
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DenseOperator {
    DenseOperator::from_fn(rows, cols, |_, _| scale * rng.random_range(-1.0..=1.0))
}

/// A seeded instance whose solution set is exactly `{x*}`.
///
/// `f(x, y) = ⟨M(x − x*), y − x⟩` with `M = RᵀR + δI` positive definite, so
/// `x*` is the unique equilibrium of `f` on `C`. `g(u, v) = ⟨N(u − Ax*),
/// v − u⟩` with `N = PᵀP` of rank ⌊m/2⌋ (zero when m = 1), so `g` is
/// monotone but generally not strictly. `S` and `T` average the identity
/// with the projection onto a ball centered at `x*` and `Ax*`, which are
/// therefore fixed points. Entries of `R` and `P` are scaled by `1/√dim`
/// to keep `‖M‖` and `‖N‖` of order one at every size.
pub fn generate_planted(n: usize, m: usize, seed: u64) -> ProblemSpec {
    generate_planted_with(n, m, seed, &PlantedParams::default())
}

pub fn generate_planted_with(n: usize, m: usize, seed: u64, params: &PlantedParams) -> ProblemSpec {
    assert!(n >= 1 && m >= 1, "dimensions must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let x_star = Vector::from_raw(
        (0..n)
            .map(|_| rng.random_range(-params.solution_radius..=params.solution_radius))
            .collect(),
    );
    let a = uniform_matrix(&mut rng, m, n, 1.0);
    let ax_star = a.mul_vec(&x_star);

    let r = uniform_matrix(&mut rng, n, n, 1.0 / (n as f64).sqrt());
    let m_f = r.gram_with(&r).add_diagonal(params.delta);
    let q_f = -&m_f.mul_vec(&x_star);
    let f = Bifunction::vi_affine(m_f, q_f, Monotonicity::Pseudomonotone)
        .expect("square operator by construction");

    let rank = m / 2;
    let n_g = if rank == 0 {
        DenseOperator::zeros(m, m)
    } else {
        let p = uniform_matrix(&mut rng, rank, m, 1.0 / (m as f64).sqrt());
        p.gram_with(&p)
    };
    let q_g = -&n_g.mul_vec(&ax_star);
    let g = Bifunction::vi_affine(n_g, q_g, Monotonicity::Monotone)
        .expect("square operator by construction");

    let w = params.box_half_width;
    let c = ConvexSet::cube(n, -w, w).expect("valid box");
    let q = ConvexSet::boxed(ax_star.map(|v| v - w), ax_star.map(|v| v + w)).expect("valid box");

    let s = NonexpansiveMap::averaged(
        params.map_theta,
        NonexpansiveMap::projection(
            ConvexSet::ball(x_star.clone(), params.fixed_ball_radius).expect("valid ball"),
        ),
    )
    .expect("valid averaging weight");
    let t = NonexpansiveMap::averaged(
        params.map_theta,
        NonexpansiveMap::projection(
            ConvexSet::ball(ax_star.clone(), params.fixed_ball_radius).expect("valid ball"),
        ),
    )
    .expect("valid averaging weight");

    let dir = loop {
        let d = Vector::from_raw((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
        if d.norm() > 1e-8 {
            break d;
        }
    };
    let start = x_star.axpy(params.start_offset / dir.norm(), &dir);
    let x1 = project(&c, &start).expect("box projection");

    ProblemSpec { c, q, a, f, g, s, t, x1, planted_solution: Some(x_star) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::map_apply;

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(generate_planted(4, 3, 42), generate_planted(4, 3, 42));
        assert_ne!(generate_planted(4, 3, 42), generate_planted(4, 3, 43));
    }

    #[test]
    fn one_dimensional_instance_has_equilibrium_at_planted_point() {
        let p = generate_planted(1, 1, 5);
        let x_star = p.planted_solution.clone().unwrap();
        let field = p.f.operator(&x_star).unwrap();
        assert!(field.norm() < 1e-14);
        for y in [-5.0, -1.0, 0.0, 3.0, 5.0] {
            let y = Vector::new(vec![y]).unwrap();
            assert!(p.f.eval(&x_star, &y).abs() < 1e-13);
        }
        // m = 1 gives g ≡ 0
        assert!(p.g.operator_norm() == 0.0);
    }

    #[test]
    fn planted_point_is_fixed_by_both_maps() {
        let p = generate_planted(6, 4, 8);
        let x_star = p.planted_solution.clone().unwrap();
        assert_eq!(map_apply(&p.s, &x_star).unwrap(), x_star);
        let ax = p.a.mul_vec(&x_star);
        assert_eq!(map_apply(&p.t, &ax).unwrap(), ax);
    }

    #[test]
    fn start_is_in_c_and_away_from_solution() {
        for seed in 0..20 {
            let p = generate_planted(5, 5, seed);
            assert!(p.c.contains(&p.x1, 0.0));
            let d = p.x1.dist(p.planted_solution.as_ref().unwrap());
            assert!(d > 0.5 && d <= 2.0 + 1e-12, "seed {seed}: {d}");
        }
    }
}

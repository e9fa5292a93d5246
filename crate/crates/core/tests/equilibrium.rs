use sepnm::equilibrium::{
    check_assumptions, prox_step, prox_step_at, resolvent, resolvent_oracle, resolvent_oracle_refined, Bifunction,
    EquilibriumError, InnerOptions, Monotonicity,
};
use sepnm::linalg::{DenseOperator, Vector};
use sepnm::sets::ConvexSet;

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn affine_1d(a: f64, b: f64) -> Bifunction {
    Bifunction::vi_affine(DenseOperator::from_rows(vec![vec![a]]).unwrap(), v(&[b]), Monotonicity::Monotone).unwrap()
}

fn interval(lo: f64, hi: f64) -> ConvexSet {
    ConvexSet::boxed(v(&[lo]), v(&[hi])).unwrap()
}

#[test]
fn one_dimensional_resolvent_has_a_closed_form() {
    // g(w, v) = (a w + b)(v − w) gives w = clamp((u − αb) / (1 + αa))
    for &(a, b, alpha, u, lo, hi) in &[
        (1.0, 0.5, 2.0, 3.0, -1.0, 1.0),
        (0.0, -1.0, 0.5, 0.2, -2.0, 2.0),
        (2.5, 0.0, 1.0, -7.0, -1.0, 4.0),
        (0.3, 0.2, 4.0, 1.0, -3.0, 3.0),
    ] {
        let w = resolvent(&affine_1d(a, b), &interval(lo, hi), alpha, &v(&[u]), 1e-12, 100_000).unwrap();
        let expected = ((u - alpha * b) / (1.0 + alpha * a)).clamp(lo, hi);
        assert!((w[0] - expected).abs() < 1e-9, "a={a} b={b}: {} vs {expected}", w[0]);
    }
}

#[test]
fn grid_oracle_brackets_the_closed_form() {
    let (g, q) = (affine_1d(1.5, -0.4), interval(-2.0, 2.0));
    let u = v(&[0.9]);
    let expected = (0.9 + 0.4) / (1.0 + 1.5);
    let coarse = resolvent_oracle(&g, &q, 1.0, &u, 401).unwrap();
    assert!((coarse.point[0] - expected).abs() <= coarse.spacing);
    let fine = resolvent_oracle_refined(&g, &q, 1.0, &u, 401, 2).unwrap();
    assert!(fine.spacing < coarse.spacing);
    assert!((fine.point[0] - expected).abs() <= fine.spacing);
}

#[test]
fn oracle_refuses_unbounded_or_high_dimensional_sets() {
    let g = Bifunction::zero(3);
    let q = ConvexSet::cube(3, 0.0, 1.0).unwrap();
    assert!(matches!(
        resolvent_oracle(&g, &q, 1.0, &v(&[0.0, 0.0, 0.0]), 11),
        Err(EquilibriumError::OracleUnsupported(_))
    ));
    let g1 = Bifunction::zero(1);
    assert!(resolvent_oracle(&g1, &ConvexSet::whole(1), 1.0, &v(&[0.0]), 11).is_err());
}

#[test]
fn nonsymmetric_resolvent_solves_its_variational_inequality() {
    // rotation plus a small symmetric part: monotone, far from symmetric
    let m = DenseOperator::from_rows(vec![vec![0.2, 3.0], vec![-3.0, 0.2]]).unwrap();
    let g = Bifunction::vi_affine(m, v(&[0.5, -0.5]), Monotonicity::Monotone).unwrap();
    let q = ConvexSet::cube(2, -1.0, 1.0).unwrap();
    let (alpha, u) = (0.7, v(&[2.0, 0.3]));
    let w = resolvent(&g, &q, alpha, &u, 1e-12, 1_000_000).unwrap();
    // KKT on the box: r = αG(w) + w − u vanishes on free coordinates and
    // points outward on active ones
    let r = &(&g.operator(&w).unwrap().scale(alpha) + &w) - &u;
    for i in 0..2 {
        if w[i] <= -1.0 + 1e-12 {
            assert!(r[i] >= -1e-9, "{r:?}");
        } else if w[i] >= 1.0 - 1e-12 {
            assert!(r[i] <= 1e-9, "{r:?}");
        } else {
            assert!(r[i].abs() <= 1e-9, "{r:?}");
        }
    }
}

#[test]
fn zero_bifunction_resolvent_is_the_projection() {
    let q = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
    let w = resolvent(&Bifunction::zero(2), &q, 3.0, &v(&[3.0, 4.0]), 1e-12, 1000).unwrap();
    assert!(w.dist(&v(&[0.6, 0.8])) < 1e-12);
}

#[test]
fn prox_step_of_affine_bifunction_is_a_projected_gradient_step() {
    let f = affine_1d(2.0, 1.0);
    let c = interval(-1.0, 1.0);
    let p = prox_step(&f, &c, &v(&[0.5]), 0.25, &InnerOptions::default()).unwrap();
    // 0.5 − 0.25·(2·0.5 + 1) = 0
    assert!(p.minimizer[0].abs() < 1e-15);
    let corrected = prox_step_at(&f, &c, &v(&[0.0]), &v(&[0.5]), 0.25, &InnerOptions::default()).unwrap();
    assert!((corrected.minimizer[0] - 0.25).abs() < 1e-15);
}

#[test]
fn general_prox_step_matches_the_affine_closed_form() {
    let affine = affine_1d(1.0, 0.0);
    let general = Bifunction::general(
        1,
        |x: &Vector, y: &Vector| x[0] * (y[0] - x[0]),
        |x: &Vector, _: &Vector| x.clone(),
        Monotonicity::Monotone,
        0.5,
        0.5,
    );
    let c = interval(-2.0, 2.0);
    let x = v(&[1.0]);
    let opts = InnerOptions::default();
    let exact = prox_step(&affine, &c, &x, 0.5, &opts).unwrap();
    let iterative = prox_step(&general, &c, &x, 0.5, &opts).unwrap();
    assert!(exact.minimizer.dist(&iterative.minimizer) < 1e-6);
}

#[test]
fn prox_step_rejects_bad_input() {
    let f = affine_1d(1.0, 0.0);
    let c = interval(0.0, 1.0);
    let opts = InnerOptions::default();
    assert!(matches!(prox_step(&f, &c, &v(&[0.5]), 0.0, &opts), Err(EquilibriumError::NonPositiveParameter(_))));
    assert!(matches!(prox_step(&f, &c, &v(&[3.0]), 1.0, &opts), Err(EquilibriumError::NotInDomain { .. })));
    assert!(prox_step(&f, &c, &v(&[0.5, 0.5]), 1.0, &opts).is_err());
}

#[test]
fn sampled_assumptions_hold_for_monotone_affine_bifunctions() {
    let m = DenseOperator::from_rows(vec![vec![2.0, 1.0, 0.0], vec![-1.0, 1.0, 0.5], vec![0.0, -0.5, 0.3]]).unwrap();
    let f = Bifunction::vi_affine(m, v(&[0.1, 0.0, -0.2]), Monotonicity::Monotone).unwrap();
    let report = check_assumptions(&f, &ConvexSet::cube(3, -2.0, 2.0).unwrap(), 400, 9);
    assert!(report.is_clean(Monotonicity::Monotone), "{report:?}");
}

#[test]
fn sampled_assumptions_catch_a_non_monotone_bifunction() {
    let f = affine_1d(-1.0, 0.0);
    let report = check_assumptions(&f, &interval(-1.0, 1.0), 200, 1);
    assert!(report.monotone > 1e-3);
    assert!(!report.is_clean(Monotonicity::Monotone));
}

#[test]
fn too_small_lipschitz_constants_are_detected() {
    let m = DenseOperator::from_rows(vec![vec![0.0, 4.0], vec![-4.0, 0.0]]).unwrap();
    let f = Bifunction::vi_affine_with_constants(m, v(&[0.0, 0.0]), Monotonicity::Monotone, 0.1, 0.1).unwrap();
    let report = check_assumptions(&f, &ConvexSet::cube(2, -3.0, 3.0).unwrap(), 400, 4);
    assert!(report.lipschitz > 1e-3, "{report:?}");
}

#[test]
fn resolvent_matches_a_fine_grid_to_one_micro() {
    // g(u, v) = (u − 0.3)(v − u) on [−1, 1], α = 2, u = 0.9
    let (g, q) = (affine_1d(1.0, -0.3), interval(-1.0, 1.0));
    let u = v(&[0.9]);
    let w = resolvent(&g, &q, 2.0, &u, 1e-12, 100_000).unwrap();
    // three zoom levels of 201 points reach a spacing below a 10⁷-point grid
    let oracle = resolvent_oracle_refined(&g, &q, 2.0, &u, 201, 3).unwrap();
    assert!(oracle.spacing < 2.0 / 1e7, "{}", oracle.spacing);
    assert!((w[0] - oracle.point[0]).abs() <= 1e-6, "{} vs {}", w[0], oracle.point[0]);
}

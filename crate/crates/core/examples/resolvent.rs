//! The resolvent of a monotone affine bifunction, checked against the grid
//! oracle and against firm nonexpansiveness.

use sepnm::equilibrium::{resolvent, resolvent_oracle, Bifunction, Monotonicity};
use sepnm::linalg::{DenseOperator, Vector};
use sepnm::sets::ConvexSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // g(w, v) = ⟨Mw + q, v − w⟩ with a skew part, on a box in the plane
    let m = DenseOperator::from_rows(vec![vec![1.0, 2.0], vec![-2.0, 0.5]])?;
    let g = Bifunction::vi_affine(m, Vector::new(vec![0.3, -0.1])?, Monotonicity::Monotone)?;
    let q = ConvexSet::cube(2, -1.0, 1.0)?;

    let u = Vector::new(vec![1.5, 0.8])?;
    let w = resolvent(&g, &q, 0.5, &u, 1e-12, 1_000_000)?;
    let oracle = resolvent_oracle(&g, &q, 0.5, &u, 61)?;
    println!("T(u)     = {:?}", w.as_slice());
    println!("oracle   = {:?} (spacing {:.3e})", oracle.point.as_slice(), oracle.spacing);
    println!("gap      = {:.3e}", w.dist(&oracle.point));

    let v = Vector::new(vec![-0.4, 2.0])?;
    let tv = resolvent(&g, &q, 0.5, &v, 1e-12, 1_000_000)?;
    let d = &w - &tv;
    println!("‖Tu − Tv‖² = {:.6}  ≤  ⟨Tu − Tv, u − v⟩ = {:.6}", d.norm_sq(), d.dot(&(&u - &v)));

    for alpha in [0.1, 1.0, 10.0] {
        let w = resolvent(&g, &q, alpha, &u, 1e-12, 1_000_000)?;
        println!("α = {alpha:<5} T(u) = {:?}", w.as_slice());
    }
    Ok(())
}

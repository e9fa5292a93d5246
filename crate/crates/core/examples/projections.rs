//! Projections onto the closed-form sets and onto intersections.

use sepnm::linalg::Vector;
use sepnm::sets::{halfspace_dominates, project, project_intersection, project_polyhedral, ConvexSet};

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = v(&[3.0, -2.0, 0.5]);
    let sets = [
        ("box [-1,1]^3", ConvexSet::cube(3, -1.0, 1.0)?),
        ("unit ball", ConvexSet::ball(Vector::zeros(3), 1.0)?),
        ("x+y+z <= 0", ConvexSet::halfspace(v(&[1.0, 1.0, 1.0]), 0.0)?),
    ];
    for (name, set) in &sets {
        let p = project(set, &x)?;
        println!("{name:<14} P(x) = {:?}  dist = {:.4}", p.as_slice(), p.dist(&x));
    }

    let members: Vec<ConvexSet> = sets.into_iter().map(|(_, s)| s).collect();
    let dykstra = project_intersection(&members, &x, 1e-12, 100_000)?;
    println!("\nall three, Dykstra     {:?}", dykstra.as_slice());

    // the exact path handles only polyhedral members
    let polyhedral = [members[0].clone(), members[2].clone()];
    let exact = project_polyhedral(&polyhedral, &x, 1e-13)?.expect("box and halfspace are polyhedral");
    let approx = project_intersection(&polyhedral, &x, 1e-12, 100_000)?;
    println!("box ∩ halfspace, exact {:?}", exact.as_slice());
    println!("box ∩ halfspace, gap to Dykstra {:.2e}", exact.dist(&approx));

    // the cut used by the shrinking-projection solver
    let cut = halfspace_dominates(&v(&[0.0, 0.0, 0.0]), &v(&[2.0, 0.0, 0.0]));
    println!("\npoints closer to 0 than to 2e1: {cut:?}");
    Ok(())
}

//! Generate a planted instance, write it to disk, read it back and verify
//! the planted solution and the monotonicity claims.

use sepnm::equilibrium::check_assumptions;
use sepnm::problems::{self, generate_planted, verify_planted};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("sepnm-planted-io");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("planted-n4-m3-seed7.json");

    let p = generate_planted(4, 3, 7);
    problems::save(&p, &path)?;
    let back = problems::load(&path)?;
    println!("wrote and reloaded {} (identical: {})", path.display(), back == p);

    let report = verify_planted(&back, 500, 0)?;
    println!("planted point: {report:#?}");
    println!("clean: {}", report.is_clean());

    let f = check_assumptions(&back.f, &back.c, 500, 1);
    let g = check_assumptions(&back.g, &back.q, 500, 2);
    println!("f on C: {f:?}");
    println!("g on Q: {g:?}");
    Ok(())
}

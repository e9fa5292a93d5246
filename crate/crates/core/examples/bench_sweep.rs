//! Iteration counts of both solvers across sizes, as `sepnm bench` prints
//! them for a single size.

use sepnm::cli::{bench_table, Algorithm, BenchArgs, Overrides};

fn main() {
    for (n, m) in [(2, 2), (5, 5), (10, 5)] {
        for algorithm in [Algorithm::Weak, Algorithm::Strong] {
            let args = BenchArgs { seeds: 1..=3, n, m, algorithm, overrides: Overrides::default() };
            println!("n = {n}, m = {m}, {algorithm:?}");
            match bench_table(&args) {
                Ok(table) | Err((_, table)) => print!("{table}"),
            }
            println!();
        }
    }
}

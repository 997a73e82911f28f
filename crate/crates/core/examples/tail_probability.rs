// How likely is every vertex to hold the rumor after s transmissions of
// asynchronous `for`, compared with the exponential tail bound.

use std::error::Error;

use gossipbench::experiments::tail_probability;
use gossipbench::graph::FamilySpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = FamilySpec::Chain { n: 32 }.generate()?;
    let curve = tail_probability(&g, 0, &[8, 16, 32, 64, 128, 512, 2048], 500, 5)?;
    println!("{:>5} {:>8} {:>6} {:>8} {:>8} {:>6}", "s", "min P", "at", "witness", "bound", "ok");
    for p in &curve.points {
        println!(
            "{:>5} {:>8.3} {:>6} {:>8.3} {:>8.3} {:>6}",
            p.s, p.min_empirical, p.argmin, p.witness_empirical, p.witness_bound, p.consistent
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

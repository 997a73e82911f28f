// Synchronous `fwr` on pure q-ary trees against the largest root-to-leaf sum
// of out-degrees.

use std::error::Error;

use gossipbench::experiments::tree_experiment;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("{:>2} {:>5} {:>5} {:>6} {:>6}", "q", "depth", "n", "bound", "worst");
    for q in [2, 3] {
        for depth in 1..=5 {
            let r = tree_experiment(q, depth, 50, 11)?;
            let worst = r.rounds.iter().max().copied().unwrap_or(0);
            println!("{q:>2} {depth:>5} {:>5} {:>6} {worst:>6}", r.n, r.bound);
            assert!(r.all_within_bound);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

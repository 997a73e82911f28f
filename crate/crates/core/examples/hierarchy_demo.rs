// The two-vertex graph with the two toy protocols and `fwr`.

use std::error::Error;

use gossipbench::experiments::{hierarchy_demo, MIN_HIERARCHY_TRIALS};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let r = hierarchy_demo(MIN_HIERARCHY_TRIALS, 1)?;
    println!("alpha = {}", r.alpha);
    for p in &r.alpha_points {
        println!("  covered within {:>2} opportunities: {:.4} (1-(1-a)^s = {:.4})", p.s, p.empirical, p.theoretical);
    }
    println!(
        "  still uncovered after 30: {:.5} vs {:.5}",
        r.alpha_uncovered_after_30, r.alpha_uncovered_theoretical
    );
    println!("twice: covered {:.4}, mean receipts {:.4}", r.twice_covering_frequency, r.twice_mean_receipts);
    println!("fwr: {}/{} covered with one transmission", r.fwr_single_transmission_trials, r.trials);
    println!("all within tolerance: {}", r.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

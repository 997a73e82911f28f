// Runs `fwr` in both modes on a few graphs and checks every applicable
// bound against the run.

use std::error::Error;

use gossipbench::engine::{trial_seed, Mode, Placement, PlacementMode, RunOptions, Simulation};
use gossipbench::experiments::{check_bounds, BoundStatus};
use gossipbench::gfield::Field;
use gossipbench::graph::FamilySpec;
use gossipbench::protocols::ProtocolSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let field = Field::gf256();
    for spec in ["ring:24", "torus:5x5", "regular:64:3:1", "tree:2:4"] {
        let g = spec.parse::<FamilySpec>()?.generate()?;
        for mode in [Mode::Sync, Mode::Async] {
            let seed = trial_seed(2024, 0);
            let placement = Placement::resolve(&PlacementMode::DistinctRandom(None), &g, 3, seed)?;
            let sim = Simulation::new(&g, ProtocolSpec::FWR, &field, 4, &placement, seed)?;
            let metrics = sim.run(mode, &RunOptions::with_budget(1_000_000))?.metrics;
            println!("{spec} {mode}: delay {} transmissions {}", metrics.delay, metrics.transmissions);
            for c in check_bounds(&g, &placement, &ProtocolSpec::FWR, mode, &metrics)? {
                if c.status != BoundStatus::NotApplicable {
                    println!("  {:<36} {:>6} {} {:<6} {:?}", c.name, c.observed, c.relation, c.theoretical, c.status);
                }
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

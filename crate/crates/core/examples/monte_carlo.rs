// A batch of seeded trials with quantiles, the same thing `gossipbench run`
// writes out.

use std::error::Error;

use gossipbench::cli::run_csv;
use gossipbench::engine::{Mode, PlacementMode};
use gossipbench::experiments::{monte_carlo, TrialConfig};
use gossipbench::graph::FamilySpec;
use gossipbench::protocols::ProtocolSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec: FamilySpec = "torus:6x6".parse()?;
    let g = spec.generate()?;
    for protocol in [ProtocolSpec::For, ProtocolSpec::Nca, ProtocolSpec::FWR] {
        let mut cfg = TrialConfig::new(protocol, Mode::Async, 2, 100, 42);
        cfg.placement = PlacementMode::DistinctRandom(None);
        let s = monte_carlo(&g, &spec.to_string(), &cfg)?;
        let d = s.delay.expect("some trials covered");
        let t = s.transmissions.expect("some trials covered");
        println!(
            "{:<4} covered {}/{}  delay median {:>7.1} [{:.1}, {:.1}]  transmissions median {:>7.1}  violations {}",
            s.protocol, s.covered, s.trials, d.median, d.q25, d.q75, t.median, s.bound_violations.len()
        );
        if protocol.is_fwr() {
            print!("{}", run_csv(&s).lines().take(4).collect::<Vec<_>>().join("\n"));
            println!();
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

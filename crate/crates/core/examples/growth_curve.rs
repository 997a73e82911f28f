// Transmissions-to-cover on chains: `for` grows faster than linearly,
// `fwr` stays below 2n.

use std::error::Error;

use gossipbench::cli::curve_csv;
use gossipbench::experiments::growth_curve;
use gossipbench::graph::FamilySpec;
use gossipbench::protocols::ProtocolSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let chain = FamilySpec::Chain { n: 2 };
    let sizes = [8, 16, 32, 64];
    for protocol in [ProtocolSpec::For, ProtocolSpec::FWR] {
        let curve = growth_curve(&chain, &protocol, &sizes, 40, 16, 3)?;
        print!("{}", curve_csv(&curve));
        println!("strictly increasing median/n: {}\n", curve.strictly_increasing());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

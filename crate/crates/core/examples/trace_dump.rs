// Records a full message trace and audits it.

use std::error::Error;

use gossipbench::engine::{Mode, Placement, RunOptions, Simulation};
use gossipbench::gfield::Field;
use gossipbench::graph::FamilySpec;
use gossipbench::protocols::ProtocolSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g = FamilySpec::Ring { n: 5 }.generate()?;
    let field = Field::gf256();
    let placement = Placement::new(vec![0, 2]);
    for protocol in [ProtocolSpec::FWR, ProtocolSpec::Nca] {
        let out = Simulation::new(&g, protocol, &field, 2, &placement, 8)?.run(Mode::Sync, &RunOptions::with_budget(100).traced())?;
        let trace = out.audit_trace()?;
        println!("# {} sync, {} events", protocol.name(), trace.events.len());
        print!("{}", trace.to_text());
        println!(
            "gossip constraint {}, no repeated forwarding {}, coded messages consistent {}",
            trace.transmitter_constraint_holds(),
            trace.no_repeated_forwarding(),
            trace.coded_messages_consistent(&out.rumors)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

// Builds a run configuration, saves it as TOML, loads it back and runs it.

use std::error::Error;

use gossipbench::cli::{execute_run, ProtocolName, RunConfig};
use gossipbench::engine::Mode;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = RunConfig {
        graph: Some("regular:50:3:9".parse()?),
        protocol: ProtocolName::Fwr,
        mode: Mode::Sync,
        m: 4,
        placement: "random".parse()?,
        field: "gf16".parse()?,
        t: 4,
        seed: 77,
        trials: 20,
        ..RunConfig::default()
    };
    let text = cfg.to_toml();
    print!("{text}");
    let loaded = RunConfig::from_toml(&text)?;
    assert_eq!(loaded, cfg);
    let summary = execute_run(&loaded, None)?;
    println!(
        "covered {}/{}, worst rounds {}",
        summary.covered,
        summary.trials,
        summary.records.iter().map(|r| r.delay).max().unwrap_or(0)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

// The quick profile of the built-in verification battery.

use std::error::Error;

use gossipbench::cli::verify_table;
use gossipbench::experiments::battery::{run_battery, Profile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rows = run_battery(Profile::Quick, None)?;
    print!("{}", verify_table(&rows));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

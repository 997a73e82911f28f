// Generates one graph per family and prints the structural quantities the
// bounds are built from.

use std::error::Error;

use gossipbench::graph::{parse_graph, write_graph, FamilySpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("{:<18} {:>5} {:>5} {:>5} {:>5} {:>5}", "family", "n", "|E|", "dout", "din", "diam");
    for spec in ["chain:16", "ring:16", "tree:2:3", "torus:4x5", "complete:6", "regular:20:3:7"] {
        let spec: FamilySpec = spec.parse()?;
        let g = spec.generate()?;
        println!(
            "{:<18} {:>5} {:>5} {:>5} {:>5} {:>5}",
            spec.to_string(),
            g.n(),
            g.edge_count(),
            g.max_out_degree(),
            g.max_in_degree(),
            g.diameter()
        );
    }

    // Pure trees only point away from the root.
    let tree = FamilySpec::QaryTree { q: 3, depth: 2, pure: true }.generate()?;
    println!("pure 3-ary tree of depth 2: tree bound {}", tree.tree_bound(0)?);

    // Round trip through the edge-list format.
    let ring = FamilySpec::Ring { n: 5 }.generate()?;
    let text = write_graph(&ring);
    print!("{text}");
    assert_eq!(parse_graph(&text)?.edges().collect::<Vec<_>>(), ring.edges().collect::<Vec<_>>());

    let chain = FamilySpec::Chain { n: 6 }.generate()?;
    println!("chain:6 with rumors at 0 and 5: D_c = {}", chain.bitstring_diameter(&[0, 5])?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

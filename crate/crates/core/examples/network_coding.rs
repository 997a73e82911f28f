// Random linear network coding by hand: encode three payloads, decode from
// any three independent combinations, then let `nca` do the same on a graph.

use std::error::Error;

use gossipbench::engine::{Mode, Placement, RunOptions, Simulation};
use gossipbench::gfield::{decode, DecodingBasis, Field, GfVector};
use gossipbench::graph::FamilySpec;
use gossipbench::protocols::{NodeState, ProtocolSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let f = Field::gf256();
    let (m, t) = (3, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let originals: Vec<GfVector> = (0..m).map(|_| f.random_vector(t, &mut rng)).collect();

    let mut basis = DecodingBasis::new(f.clone(), m, t);
    let mut received = Vec::new();
    while !basis.is_full() {
        let header = f.random_vector(m, &mut rng);
        let payload = f.lincomb(&header, &originals, t)?;
        let innovative = basis.insert(&header, &payload)?;
        println!("header {} innovative={innovative} rank={}", header.to_hex(&f), basis.rank());
        received.push((payload, header));
    }
    assert_eq!(basis.solve()?, originals);
    assert_eq!(decode(&f, m, t, &received)?, originals);
    println!("decoded {m} payloads from {} packets", received.len());

    let g = FamilySpec::Complete { n: 8 }.generate()?;
    let placement = Placement::new(vec![0, 3, 6]);
    let out = Simulation::new(&g, ProtocolSpec::Nca, &f, t, &placement, 99)?.run(Mode::Async, &RunOptions::with_budget(100_000))?;
    let exact = out.states.iter().all(|s| match s {
        NodeState::Nca(s) => s.decoded().is_some_and(|d| d.iter().zip(&out.rumors).all(|(x, r)| *x == r.payload)),
        _ => false,
    });
    println!(
        "nca on complete:8: covered={} after {} ticks, {} transmissions, every vertex exact={exact}",
        out.metrics.covered, out.metrics.delay, out.metrics.transmissions
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

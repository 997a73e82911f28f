//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{HashSet, VecDeque};
use std::process::Command;
use std::time::{Duration, Instant};

use gossipbench::engine::{trial_seed, Mode, Placement, PlacementMode, RunOptions, Simulation};
use gossipbench::experiments::{growth_curve, hierarchy_demo, paired_delays};
use gossipbench::gfield::{Field, FieldElement, FieldKind, GfMatrix, GfVector};
use gossipbench::graph::{DiGraph, FamilySpec};
use gossipbench::protocols::{NodeState, ProtocolSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

/// Graphs with n <= 512 from every family, each with its edge count worked
/// out by hand from the construction.
fn graph_set() -> Vec<(FamilySpec, usize)> {
    vec![
        (FamilySpec::Chain { n: 64 }, 2 * 63),
        (FamilySpec::Chain { n: 512 }, 2 * 511),
        (FamilySpec::Ring { n: 33 }, 2 * 33),
        (FamilySpec::Ring { n: 512 }, 2 * 512),
        (FamilySpec::Torus { rows: 5, cols: 7 }, 4 * 35),
        (FamilySpec::Torus { rows: 22, cols: 23 }, 4 * 506),
        (FamilySpec::QaryTree { q: 2, depth: 8, pure: false }, 2 * 510),
        (FamilySpec::QaryTree { q: 3, depth: 5, pure: false }, 2 * 363),
        (FamilySpec::Complete { n: 8 }, 8 * 7),
        (FamilySpec::Complete { n: 32 }, 32 * 31),
        (FamilySpec::RandomRegular { n: 100, d: 3, seed: 5 }, 300),
        (FamilySpec::RandomRegular { n: 512, d: 4, seed: 6 }, 2048),
    ]
}

fn bfs(g: &DiGraph, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &v in g.successors(u) {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Largest distance from any rumor holder to any vertex.
fn holder_radius(g: &DiGraph, holders: &[usize]) -> u64 {
    holders
        .iter()
        .map(|&h| bfs(g, h).into_iter().map(|d| d.expect("strongly connected")).max().unwrap())
        .max()
        .unwrap() as u64
}

fn max_out(g: &DiGraph) -> u64 {
    (0..g.n()).map(|v| g.successors(v).len()).max().unwrap() as u64
}

fn ceil_log2(n: usize) -> u64 {
    let mut k = 0;
    while (1usize << k) < n {
        k += 1;
    }
    k
}

fn run(g: &DiGraph, p: ProtocolSpec, placement: &Placement, seed: u64, mode: Mode) -> gossipbench::engine::RunMetrics {
    Simulation::new(g, p, &Field::gf256(), 2, placement, seed)
        .unwrap()
        .run(mode, &RunOptions::with_budget(50_000_000))
        .unwrap()
        .metrics
}

fn fwr_edge_bound() -> Outcome {
    let start = Instant::now();
    let (mut runs, mut bad, mut uncovered) = (0, 0, 0);
    for (gi, (spec, edges)) in graph_set().into_iter().enumerate() {
        let g = spec.generate().unwrap();
        assert_eq!(g.edge_count(), edges, "{spec}");
        for m in 1..=4usize {
            for trial in 0..22u64 {
                let seed = trial_seed(1000 + gi as u64 * 10 + m as u64, trial);
                let placement = Placement::resolve(&PlacementMode::DistinctRandom(None), &g, m, seed).unwrap();
                let r = run(&g, ProtocolSpec::FWR, &placement, seed, Mode::Async);
                runs += 1;
                uncovered += usize::from(!r.covered);
                bad += usize::from(r.transmissions > (m * edges) as u64);
            }
        }
    }
    let secs = start.elapsed();
    outcome(
        runs >= 1000 && bad == 0 && uncovered == 0 && secs < Duration::from_secs(60),
        format!("{runs} runs, {bad} above m|E|, {uncovered} uncovered, {:.1}s", secs.as_secs_f64()),
    )
}

fn fwr_sync_delay_bound() -> Outcome {
    let (mut runs, mut bad, mut uncovered) = (0, 0, 0);
    for (gi, (spec, _)) in graph_set().into_iter().enumerate() {
        let g = spec.generate().unwrap();
        let dout = max_out(&g);
        for m in 1..=4usize {
            for trial in 0..10u64 {
                let seed = trial_seed(2000 + gi as u64 * 10 + m as u64, trial);
                let placement = Placement::resolve(&PlacementMode::DistinctRandom(None), &g, m, seed).unwrap();
                let bound = m as u64 * dout * holder_radius(&g, placement.holders());
                let r = run(&g, ProtocolSpec::FWR, &placement, seed, Mode::Sync);
                runs += 1;
                uncovered += usize::from(!r.covered);
                bad += usize::from(r.delay > bound);
            }
        }
    }
    outcome(bad == 0 && uncovered == 0, format!("{runs} runs, {bad} above m*dout*D_c, {uncovered} uncovered"))
}

fn lower_bounds() -> Outcome {
    let (mut sync_runs, mut async_runs, mut bad) = (0, 0, 0);
    for (gi, (spec, _)) in graph_set().into_iter().enumerate() {
        let g = spec.generate().unwrap();
        for protocol in [ProtocolSpec::For, ProtocolSpec::Nca, ProtocolSpec::FWR] {
            for trial in 0..4u64 {
                let seed = trial_seed(3000 + gi as u64, trial);
                let source = (seed % g.n() as u64) as usize;
                let placement = Placement::single(source, 1);
                let floor = ceil_log2(g.n()).max(holder_radius(&g, &[source]));
                let s = run(&g, protocol, &placement, seed, Mode::Sync);
                let a = run(&g, protocol, &placement, seed, Mode::Async);
                assert!(s.covered && a.covered, "{spec} {}", protocol.name());
                sync_runs += 1;
                async_runs += 1;
                bad += usize::from(s.delay < floor);
                bad += usize::from(a.transmissions < g.n() as u64 - 1);
            }
        }
    }
    outcome(bad == 0, format!("{sync_runs} sync and {async_runs} async runs, {bad} below the lower bounds"))
}

fn tree_bound() -> Outcome {
    let start = Instant::now();
    let (mut runs, mut bad) = (0, 0);
    for q in [2usize, 3] {
        for depth in 0..=6usize {
            let g = FamilySpec::QaryTree { q, depth, pure: true }.generate().unwrap();
            // Every internal vertex of a complete q-ary tree has q children,
            // so every root-to-leaf path sums to q * depth.
            let bound = (q * depth) as u64;
            for trial in 0..100u64 {
                let r = run(&g, ProtocolSpec::FWR, &Placement::single(0, 1), trial_seed(4000 + q as u64 * 10 + depth as u64, trial), Mode::Sync);
                runs += 1;
                bad += usize::from(!r.covered || r.delay > bound);
            }
        }
    }
    let secs = start.elapsed();
    outcome(
        bad == 0 && secs < Duration::from_secs(30),
        format!("{runs} runs, {bad} above q*depth, {:.1}s", secs.as_secs_f64()),
    )
}

fn chain_separation() -> Outcome {
    let start = Instant::now();
    let chain = FamilySpec::Chain { n: 2 };
    let ladder = [16, 32, 64, 128, 256];
    let f = growth_curve(&chain, &ProtocolSpec::For, &ladder, 200, 16, 5000).unwrap();
    let w = growth_curve(&chain, &ProtocolSpec::FWR, &ladder, 200, 16, 5000).unwrap();
    let fr = f.ratios();
    let wr = w.ratios();
    let increasing = fr.windows(2).all(|p| p[0] < p[1]);
    let linear = wr.iter().all(|&r| r <= 2.0);
    let secs = start.elapsed();
    let show = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" ");
    outcome(
        increasing && linear && f.fully_covered() && w.fully_covered() && secs < Duration::from_secs(180),
        format!("for median/n {}; fwr median/n {}; {:.1}s", show(&fr), show(&wr), secs.as_secs_f64()),
    )
}

fn nca_not_faster() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for spec in ["ring:32", "torus:6x6"] {
        let g = spec.parse::<FamilySpec>().unwrap().generate().unwrap();
        let c = paired_delays(&g, spec, ProtocolSpec::For, ProtocolSpec::Nca, 200, 6000).unwrap();
        ok &= c.exhausted == 0 && c.challenger_median_delay >= c.baseline_median_delay;
        detail.push(format!("{spec} nca {} for {} over {} pairs", c.challenger_median_delay, c.baseline_median_delay, c.pairs));
    }
    outcome(ok, detail.join("; "))
}

fn nca_decodes() -> Outcome {
    let g = FamilySpec::Complete { n: 8 }.generate().unwrap();
    let field = Field::gf256();
    let mut exact = 0;
    for trial in 0..100u64 {
        let seed = trial_seed(7000, trial);
        let placement = Placement::resolve(&PlacementMode::DistinctRandom(None), &g, 3, seed).unwrap();
        let out = Simulation::new(&g, ProtocolSpec::Nca, &field, 8, &placement, seed)
            .unwrap()
            .run(Mode::Async, &RunOptions::with_budget(1_000_000))
            .unwrap();
        let originals: Vec<GfVector> = out.rumors.iter().map(|r| r.payload.clone()).collect();
        let all = out.states.iter().all(|s| match s {
            NodeState::Nca(s) => s.decoded() == Some(&originals[..]),
            _ => false,
        });
        exact += usize::from(out.metrics.covered && all);
    }
    outcome(exact == 100, format!("{exact}/100 trials decoded exactly at every vertex"))
}

fn hierarchy() -> Outcome {
    let r = hierarchy_demo(10_000, 8000).unwrap();
    let mut ok = (r.twice_covering_frequency - 0.5).abs() <= 0.02
        && (r.twice_mean_receipts - 1.0).abs() <= 0.03
        && r.fwr_covered_trials == 10_000;
    let mut alpha = Vec::new();
    for s in [1u64, 2, 5, 10] {
        let p = r.alpha_points.iter().find(|p| p.s == s).expect("grid point");
        let expected = 1.0 - 0.5f64.powi(s as i32);
        ok &= (p.empirical - expected).abs() <= 0.02;
        alpha.push(format!("s={s} {:.4}/{expected:.4}", p.empirical));
    }
    outcome(
        ok,
        format!(
            "twice cover {:.4} receipts {:.4}; alpha {}; fwr {}/10000",
            r.twice_covering_frequency,
            r.twice_mean_receipts,
            alpha.join(" "),
            r.fwr_covered_trials
        ),
    )
}

fn peasant_mul(mut a: u16, mut b: u16) -> u16 {
    let mut p = 0;
    while b != 0 {
        if b & 1 == 1 {
            p ^= a;
        }
        a <<= 1;
        if a & 0x100 != 0 {
            a ^= 0x11B;
        }
        b >>= 1;
    }
    p
}

fn span_rank(rows: &[u8; 4]) -> usize {
    let span: HashSet<u8> = (0u8..16).map(|pick| (0..4).filter(|i| pick >> i & 1 == 1).fold(0, |x, i| x ^ rows[i])).collect();
    span.len().trailing_zeros() as usize
}

fn field_oracles() -> Outcome {
    let gf2 = Field::new(FieldKind::Binary { k: 1 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9000);
    let mut rank_bad = 0;
    for _ in 0..10_000 {
        let rows: [u8; 4] = std::array::from_fn(|_| rng.gen_range(0..16));
        let vectors = rows.iter().map(|&r| GfVector::from_values(&gf2, &[r as u32 & 1, r as u32 >> 1 & 1, r as u32 >> 2 & 1, r as u32 >> 3 & 1])).collect();
        rank_bad += usize::from(gf2.rank(&GfMatrix::from_rows(4, vectors).unwrap()) != span_rank(&rows));
    }
    let f = Field::gf256();
    let mut axiom_bad = 0;
    for _ in 0..10_000 {
        let [a, b, c]: [FieldElement; 3] = std::array::from_fn(|_| f.element(rng.gen_range(0..256)));
        let mut ok = f.mul(a, b).value() == peasant_mul(a.value(), b.value())
            && f.add(a, b).value() == a.value() ^ b.value()
            && f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
            && f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
            && f.mul(a, b) == f.mul(b, a)
            && f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
            && f.mul(a, f.element(1)) == a
            && f.add(a, f.element(0)) == a;
        if a.value() != 0 {
            ok &= f.inv(a).map(|i| peasant_mul(a.value(), i.value()) == 1).unwrap_or(false);
        }
        axiom_bad += usize::from(!ok);
    }
    outcome(
        rank_bad == 0 && axiom_bad == 0,
        format!("{rank_bad}/10000 rank mismatches, {axiom_bad}/10000 triples violating axioms"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_gossipbench");
    let dir = tempfile::tempdir().unwrap();
    let produce = |tag: &str, jobs: &str, seed_env: Option<&str>, seed_flag: Option<&str>| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let json = dir.path().join(format!("{tag}.json"));
        let mut cmd = Command::new(bin);
        cmd.args(["run", "--graph", "torus:5x5", "--protocol", "nca", "--m", "2", "--placement", "random", "--trials", "40", "--jobs", jobs]);
        cmd.arg("--csv").arg(&csv).arg("--json").arg(&json);
        cmd.env_remove("GOSSIPBENCH_SEED");
        if let Some(s) = seed_env {
            cmd.env("GOSSIPBENCH_SEED", s);
        }
        if let Some(s) = seed_flag {
            cmd.args(["--seed", s]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        (std::fs::read(csv).unwrap(), std::fs::read(json).unwrap())
    };
    let a = produce("a", "1", None, Some("11"));
    let b = produce("b", "3", None, Some("11"));
    let c = produce("c", "2", Some("11"), None);
    let d = produce("d", "1", None, Some("12"));
    let mut curve_out = Vec::new();
    for _ in 0..2 {
        let out = Command::new(bin)
            .args(["curve", "--family", "ring:3", "--protocol", "fwr", "--sizes", "8,16,32", "--trials", "30", "--seed", "4"])
            .env_remove("GOSSIPBENCH_SEED")
            .output()
            .unwrap();
        assert!(out.status.success());
        curve_out.push(out.stdout);
    }
    let ok = a == b && a == c && a != d && curve_out[0] == curve_out[1];
    outcome(
        ok,
        format!(
            "run csv {} bytes and json {} bytes identical across --jobs and seed sources; curve csv identical",
            a.0.len(),
            a.1.len()
        ),
    )
}

fn main() {
    type Criterion = (&'static str, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("AC1", "async fwr transmissions <= m|E|", fwr_edge_bound),
        ("AC2", "sync fwr rounds <= m*dout*D_c", fwr_sync_delay_bound),
        ("AC3", "sync delay >= max(log2 n, D_c), async transmissions >= n-1", lower_bounds),
        ("AC4", "sync fwr on q-ary trees within the tree bound", tree_bound),
        ("AC5", "for on chains superlinear, fwr linear", chain_separation),
        ("AC6", "nca median delay >= for on paired seeds", nca_not_faster),
        ("AC7", "nca decodes the original payloads", nca_decodes),
        ("AC8", "expected / almost sure / sure covering hierarchy", hierarchy),
        ("AC9", "field arithmetic and rank match brute-force oracles", field_oracles),
        ("AC10", "same seed gives byte-identical output", determinism),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let o = check();
        println!("{id} {} {title}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("{} criteria, {failed} failed", criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

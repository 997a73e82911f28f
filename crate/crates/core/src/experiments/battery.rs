//! Built-in verification battery with fixed seeds, one row per bound or
//! property checked.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::*;
use crate::engine::local_rng;
use crate::gfield::{FieldElement, GfMatrix, GfVector};
use crate::protocols::NodeState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Full,
}

/// Deliberate defects for checking that the battery catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// `fwr` forgets which (rumor, port) pairs it already sent.
    DropSentLog,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryRow {
    pub name: String,
    pub passed: bool,
    /// Runs, trials or samples behind the row.
    pub samples: usize,
    pub detail: String,
}

const SEED: u64 = 0x6055_1b5e_ed00_0001;

struct Scale {
    max_n: usize,
    seeds: u64,
    tree_depth: usize,
    tree_seeds: usize,
    ladder: Vec<usize>,
    curve_trials: usize,
    pairs: usize,
    tail_trials: usize,
    samples: usize,
}

impl Scale {
    fn of(profile: Profile) -> Self {
        match profile {
            Profile::Full => Scale {
                max_n: 512,
                seeds: 4,
                tree_depth: 6,
                tree_seeds: 100,
                ladder: vec![16, 32, 64, 128, 256],
                curve_trials: 200,
                pairs: 200,
                tail_trials: 1000,
                samples: 10_000,
            },
            Profile::Quick => Scale {
                max_n: 64,
                seeds: 2,
                tree_depth: 4,
                tree_seeds: 20,
                ladder: vec![16, 32, 64],
                curve_trials: 60,
                pairs: 60,
                tail_trials: 300,
                samples: 10_000,
            },
        }
    }
}

/// Runs every check; rows come back in a fixed order.
pub fn run_battery(profile: Profile, fault: Option<Fault>) -> Result<Vec<BatteryRow>, ExperimentError> {
    let scale = Scale::of(profile);
    let fwr = match fault {
        Some(Fault::DropSentLog) => ProtocolSpec::Fwr { recv_suppress: false, drop_sent_log: true },
        None => ProtocolSpec::FWR,
    };
    let mut rows = bound_rows(&scale, fwr)?;
    rows.push(tree_row(&scale)?);
    rows.extend(growth_rows(&scale, fwr)?);
    rows.push(paired_row(&scale)?);
    rows.push(decode_row(100)?);
    rows.push(tail_row(&scale)?);
    rows.push(hierarchy_row()?);
    rows.push(field_axiom_row(scale.samples));
    rows.push(gf2_rank_row(scale.samples));
    rows.push(determinism_row()?);
    Ok(rows)
}

fn bound_rows(scale: &Scale, fwr: ProtocolSpec) -> Result<Vec<BatteryRow>, ExperimentError> {
    // name -> (evaluated, failed, first failure)
    let mut tally: BTreeMap<String, (usize, usize, Option<String>)> = BTreeMap::new();
    let order = [
        FWR_TRANSMISSIONS_LE_M_EDGES,
        FWR_TRANSMISSIONS_LE_M_N_DOUT,
        FWR_SYNC_DELAY_LE_M_DOUT_DC,
        SYNC_DELAY_GE_LOG2_N,
        SYNC_DELAY_GE_BITSTRING_DIAMETER,
        ASYNC_TRANSMISSIONS_GE_N_MINUS_1,
        ASYNC_TRANSMISSIONS_LE_DELAY,
        SYNC_TRANSMISSIONS_LE_N_DELAY,
    ];
    for name in order {
        tally.insert(name.to_string(), (0, 0, None));
    }
    let mut uncovered = 0usize;
    let mut runs = 0usize;
    for (gi, spec) in bound_graph_set(scale.max_n).into_iter().enumerate() {
        let g = spec.generate()?;
        let label = spec.to_string();
        let mut batches = Vec::new();
        for m in 1..=4usize.min(g.n()) {
            let mut cfg = TrialConfig::new(fwr, Mode::Async, m, scale.seeds as usize, SEED + gi as u64 * 16 + m as u64);
            cfg.placement = PlacementMode::DistinctRandom(None);
            cfg.payload_len = 2;
            batches.push(cfg.clone());
            cfg.mode = Mode::Sync;
            batches.push(cfg);
        }
        for protocol in [ProtocolSpec::For, ProtocolSpec::Nca] {
            for mode in [Mode::Sync, Mode::Async] {
                let mut cfg = TrialConfig::new(protocol, mode, 1, scale.seeds as usize, SEED ^ (gi as u64) << 8);
                cfg.payload_len = 2;
                cfg.budget = Some(default_budget(&g, 1, 64));
                batches.push(cfg);
            }
        }
        for cfg in batches {
            for (rec, report) in run_trials(&g, &label, &cfg)? {
                runs += 1;
                let Some(report) = report else {
                    uncovered += 1;
                    continue;
                };
                for check in report.checks {
                    let entry = tally.get_mut(&check.name).expect("known bound");
                    match check.status {
                        BoundStatus::NotApplicable => {}
                        BoundStatus::Pass => entry.0 += 1,
                        BoundStatus::Fail => {
                            entry.0 += 1;
                            entry.1 += 1;
                            entry.2.get_or_insert_with(|| {
                                format!(
                                    "{label} {} {} m={} seed={}: observed {} vs {}",
                                    cfg.protocol.name(),
                                    cfg.mode,
                                    cfg.m,
                                    rec.seed,
                                    check.observed,
                                    check.theoretical
                                )
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(order
        .iter()
        .map(|&name| {
            let (evaluated, failed, first) = tally.remove(name).expect("present");
            BatteryRow {
                name: name.to_string(),
                passed: failed == 0 && evaluated > 0,
                samples: evaluated,
                detail: match first {
                    Some(f) => format!("{failed} violations, first: {f}"),
                    None => format!("0 violations in {evaluated} covered runs ({uncovered} of {runs} runs out of budget)"),
                },
            }
        })
        .collect())
}

fn tree_row(scale: &Scale) -> Result<BatteryRow, ExperimentError> {
    let mut runs = 0;
    let mut bad = Vec::new();
    for q in [2, 3] {
        for depth in 0..=scale.tree_depth {
            let r = tree_experiment(q, depth, scale.tree_seeds, SEED + (q * 100 + depth) as u64)?;
            runs += r.rounds.len();
            if !r.all_within_bound {
                let worst = r.rounds.iter().max().copied().unwrap_or(0);
                bad.push(format!("q={q} depth={depth}: {worst} rounds > {}", r.bound));
            }
        }
    }
    Ok(BatteryRow {
        name: "fwr_tree_rounds_le_tree_bound".into(),
        passed: bad.is_empty(),
        samples: runs,
        detail: if bad.is_empty() { format!("q in {{2,3}}, depth <= {}", scale.tree_depth) } else { bad.join("; ") },
    })
}

fn growth_rows(scale: &Scale, fwr: ProtocolSpec) -> Result<Vec<BatteryRow>, ExperimentError> {
    let chain = FamilySpec::Chain { n: 2 };
    let fmt = |c: &GrowthCurve| c.ratios().iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(" ");
    let f = growth_curve(&chain, &ProtocolSpec::For, &scale.ladder, scale.curve_trials, 16, SEED)?;
    let w = growth_curve(&chain, &fwr, &scale.ladder, scale.curve_trials, 16, SEED)?;
    Ok(vec![
        BatteryRow {
            name: "for_chain_median_over_n_increasing".into(),
            passed: f.fully_covered() && f.strictly_increasing(),
            samples: scale.curve_trials * scale.ladder.len(),
            detail: format!("median/n: {}", fmt(&f)),
        },
        BatteryRow {
            name: "fwr_chain_median_over_n_le_2".into(),
            passed: w.fully_covered() && w.ratios().iter().all(|&r| r <= 2.0),
            samples: scale.curve_trials * scale.ladder.len(),
            detail: format!("median/n: {}", fmt(&w)),
        },
    ])
}

fn paired_row(scale: &Scale) -> Result<BatteryRow, ExperimentError> {
    let mut ok = true;
    let mut detail = Vec::new();
    for spec in ["ring:32", "torus:6x6"] {
        let g = spec.parse::<FamilySpec>()?.generate()?;
        let c = paired_delays(&g, spec, ProtocolSpec::For, ProtocolSpec::Nca, scale.pairs, SEED)?;
        ok &= c.exhausted == 0 && c.challenger_median_delay >= c.baseline_median_delay;
        detail.push(format!("{spec}: nca {} vs for {}", c.challenger_median_delay, c.baseline_median_delay));
    }
    Ok(BatteryRow {
        name: "nca_median_delay_ge_for".into(),
        passed: ok,
        samples: 2 * scale.pairs,
        detail: detail.join("; "),
    })
}

/// Runs `nca` to covering on the complete graph K8 with three rumors and
/// compares every vertex's decoded payloads with the originals.
pub fn nca_decode_trials(trials: usize, master_seed: u64) -> Result<usize, ExperimentError> {
    let g = FamilySpec::Complete { n: 8 }.generate()?;
    let field = Field::gf256();
    let mut exact = 0;
    for trial in 0..trials {
        let seed = trial_seed(master_seed, trial as u64);
        let placement = Placement::resolve(&PlacementMode::DistinctRandom(None), &g, 3, seed)?;
        let out = Simulation::new(&g, ProtocolSpec::Nca, &field, 8, &placement, seed)?
            .run(Mode::Async, &RunOptions::with_budget(default_budget(&g, 3, 16)))?;
        let originals: Vec<&GfVector> = out.rumors.iter().map(|r| &r.payload).collect();
        let all_match = out.metrics.covered
            && out.states.iter().all(|s| match s {
                NodeState::Nca(s) => s.decoded().is_some_and(|d| d.iter().collect::<Vec<_>>() == originals),
                _ => false,
            });
        exact += usize::from(all_match);
    }
    Ok(exact)
}

fn decode_row(trials: usize) -> Result<BatteryRow, ExperimentError> {
    let exact = nca_decode_trials(trials, SEED)?;
    Ok(BatteryRow {
        name: "nca_decodes_original_payloads".into(),
        passed: exact == trials,
        samples: trials,
        detail: format!("complete:8 m=3 gf256 t=8: {exact}/{trials} exact"),
    })
}

fn tail_row(scale: &Scale) -> Result<BatteryRow, ExperimentError> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (spec, grid) in [("chain:32", vec![8u64, 16, 32, 64]), ("torus:5x5", vec![5, 10, 25, 50])] {
        let g = spec.parse::<FamilySpec>()?.generate()?;
        let curve = tail_probability(&g, 0, &grid, scale.tail_trials, SEED)?;
        for p in &curve.points {
            ok &= p.consistent;
            if !p.consistent {
                detail.push(format!(
                    "{spec} s={}: {:.3} > {:.3} + {:.3}",
                    p.s, p.witness_empirical, p.witness_bound, p.witness_half_width
                ));
            }
        }
    }
    if ok {
        detail.push(format!("chain:32, torus:5x5, 99% Wilson, {} trials", scale.tail_trials));
    }
    Ok(BatteryRow {
        name: "for_tail_probability_le_bound".into(),
        passed: ok,
        samples: 2 * scale.tail_trials,
        detail: detail.join("; "),
    })
}

fn hierarchy_row() -> Result<BatteryRow, ExperimentError> {
    let r = hierarchy_demo(MIN_HIERARCHY_TRIALS, SEED)?;
    let alpha = r.alpha_points.iter().map(|p| format!("s={}:{:.3}/{:.3}", p.s, p.empirical, p.theoretical)).collect::<Vec<_>>();
    Ok(BatteryRow {
        name: "covering_hierarchy_two_vertices".into(),
        passed: r.passed,
        samples: r.trials,
        detail: format!(
            "twice cover {:.3}, receipts {:.3}; alpha {}; fwr {}/{}",
            r.twice_covering_frequency,
            r.twice_mean_receipts,
            alpha.join(" "),
            r.fwr_single_transmission_trials,
            r.trials
        ),
    })
}

/// Counts GF(256) triples violating any field axiom.
pub fn field_axiom_violations(samples: usize, seed: u64) -> usize {
    let f = Field::gf256();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
        let mut ok = f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
            && f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
            && f.add(a, b) == f.add(b, a)
            && f.mul(a, b) == f.mul(b, a)
            && f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
            && f.add(a, FieldElement::ZERO) == a
            && f.mul(a, FieldElement::ONE) == a
            && f.add(a, f.neg(a)) == FieldElement::ZERO;
        if !a.is_zero() {
            ok &= f.inv(a).is_ok_and(|i| f.mul(a, i) == FieldElement::ONE);
        }
        bad += usize::from(!ok);
    }
    bad
}

fn field_axiom_row(samples: usize) -> BatteryRow {
    let bad = field_axiom_violations(samples, SEED);
    BatteryRow {
        name: "gf256_field_axioms".into(),
        passed: bad == 0,
        samples,
        detail: format!("{bad} violating triples"),
    }
}

/// Rank of a 4×4 GF(2) matrix given as row bitmasks, from the size of the
/// row span.
fn gf2_span_rank(rows: [u8; 4]) -> usize {
    let span: HashSet<u8> = (0u8..16)
        .map(|pick| (0..4).filter(|i| pick >> i & 1 == 1).fold(0, |acc, i| acc ^ rows[i]))
        .collect();
    span.len().trailing_zeros() as usize
}

/// Counts random 4×4 GF(2) matrices where elimination and span enumeration
/// disagree on the rank.
pub fn gf2_rank_mismatches(samples: usize, seed: u64) -> usize {
    let f = Field::new(FieldKind::Binary { k: 1 }).expect("GF(2)");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let rows: [u8; 4] = std::array::from_fn(|_| rng.gen_range(0..16));
        let matrix = GfMatrix::from_rows(
            4,
            rows.iter().map(|&r| GfVector::from_values(&f, &[(r & 1).into(), (r >> 1 & 1).into(), (r >> 2 & 1).into(), (r >> 3).into()])).collect(),
        )
        .expect("4 columns");
        bad += usize::from(f.rank(&matrix) != gf2_span_rank(rows));
    }
    bad
}

fn gf2_rank_row(samples: usize) -> BatteryRow {
    let bad = gf2_rank_mismatches(samples, SEED);
    BatteryRow {
        name: "gf2_rank_matches_span_enumeration".into(),
        passed: bad == 0,
        samples,
        detail: format!("{bad} mismatches"),
    }
}

fn determinism_row() -> Result<BatteryRow, ExperimentError> {
    let g = FamilySpec::Torus { rows: 4, cols: 5 }.generate()?;
    let mut cfg = TrialConfig::new(ProtocolSpec::Nca, Mode::Async, 2, 50, SEED);
    cfg.placement = PlacementMode::DistinctRandom(None);
    let a = serde_json::to_string(&monte_carlo(&g, "torus:4x5", &cfg)?).expect("serializable");
    cfg.jobs = Some(1);
    let b = serde_json::to_string(&monte_carlo(&g, "torus:4x5", &cfg)?).expect("serializable");
    let mut r1 = local_rng(SEED, 3);
    let mut r2 = local_rng(SEED, 3);
    let streams_agree = (0..100).all(|_| r1.ports.gen::<u64>() == r2.ports.gen::<u64>());
    Ok(BatteryRow {
        name: "same_seed_same_output".into(),
        passed: a == b && streams_agree,
        samples: 2,
        detail: format!("{} bytes compared", a.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_rank_examples() {
        assert_eq!(gf2_span_rank([0, 0, 0, 0]), 0);
        assert_eq!(gf2_span_rank([1, 2, 4, 8]), 4);
        assert_eq!(gf2_span_rank([3, 5, 6, 0]), 2);
    }

    #[test]
    fn oracles_agree() {
        assert_eq!(gf2_rank_mismatches(2000, 1), 0);
        assert_eq!(field_axiom_violations(2000, 1), 0);
    }

    #[test]
    fn quick_battery_passes_and_catches_fault() {
        let rows = run_battery(Profile::Quick, None).unwrap();
        for r in &rows {
            assert!(r.passed, "{r:?}");
        }
        let faulty = run_battery(Profile::Quick, Some(Fault::DropSentLog)).unwrap();
        let edge_row = faulty.iter().find(|r| r.name == FWR_TRANSMISSIONS_LE_M_EDGES).unwrap();
        assert!(!edge_row.passed);
    }
}

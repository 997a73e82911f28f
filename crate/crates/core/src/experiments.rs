//! Bound checkers, Monte Carlo aggregation and the growth, tail and
//! hierarchy studies.
//!
//! Theoretical values in a [`BoundReport`] are computed from graph structure
//! and placement only, never from the run being checked.

pub mod battery;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{trial_seed, EngineError, Mode, Placement, PlacementMode, RunMetrics, RunOptions, Simulation, StopRule};
use crate::gfield::{Field, FieldKind};
use crate::graph::{DiGraph, FamilySpec, GraphError, Vertex};
use crate::protocols::ProtocolSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("bounds are only evaluated on covered runs")]
    RunNotCovered,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// z for a two-sided 99% normal interval.
pub const Z_99: f64 = 2.575_829_303_549;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    /// `<=` for upper bounds on the observed value, `>=` for lower bounds.
    pub relation: String,
    pub theoretical: u64,
    pub observed: u64,
    pub status: BoundStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunIdentity {
    pub graph: String,
    pub protocol: String,
    pub mode: Mode,
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub run: RunIdentity,
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| c.status == BoundStatus::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const SYNC_DELAY_GE_LOG2_N: &str = "sync_delay_ge_log2_n";
pub const SYNC_DELAY_GE_BITSTRING_DIAMETER: &str = "sync_delay_ge_bitstring_diameter";
pub const FWR_SYNC_DELAY_LE_M_DOUT_DC: &str = "fwr_sync_delay_le_m_dout_dc";
pub const ASYNC_TRANSMISSIONS_GE_N_MINUS_1: &str = "async_transmissions_ge_n_minus_1";
pub const FWR_TRANSMISSIONS_LE_M_EDGES: &str = "fwr_transmissions_le_m_edges";
pub const FWR_TRANSMISSIONS_LE_M_N_DOUT: &str = "fwr_transmissions_le_m_n_dout";
pub const ASYNC_TRANSMISSIONS_LE_DELAY: &str = "async_transmissions_le_delay";
pub const SYNC_TRANSMISSIONS_LE_N_DELAY: &str = "sync_transmissions_le_n_delay";

fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        u64::from(usize::BITS - (n - 1).leading_zeros())
    }
}

/// Evaluates every delay and transmission bound that applies to a covered run.
pub fn check_bounds(
    g: &DiGraph,
    placement: &Placement,
    protocol: &ProtocolSpec,
    mode: Mode,
    metrics: &RunMetrics,
) -> Result<Vec<BoundCheck>, ExperimentError> {
    if !metrics.covered {
        return Err(ExperimentError::RunNotCovered);
    }
    let n = g.n();
    let m = placement.m();
    let dc = g.bitstring_diameter(placement.holders())? as u64;
    let dout = g.max_out_degree() as u64;
    let edges = g.edge_count() as u64;
    let sync = mode == Mode::Sync;
    let fwr = protocol.is_fwr();
    let (delay, sent) = (metrics.delay, metrics.transmissions);

    let mk = |name: &str, applies: bool, relation: &str, theoretical: u64, observed: u64| {
        let holds = if relation == "<=" { observed <= theoretical } else { observed >= theoretical };
        BoundCheck {
            name: name.to_string(),
            relation: relation.to_string(),
            theoretical,
            observed,
            status: match (applies, holds) {
                (false, _) => BoundStatus::NotApplicable,
                (true, true) => BoundStatus::Pass,
                (true, false) => BoundStatus::Fail,
            },
        }
    };
    Ok(vec![
        mk(SYNC_DELAY_GE_LOG2_N, sync && m == 1, ">=", ceil_log2(n), delay),
        mk(SYNC_DELAY_GE_BITSTRING_DIAMETER, sync, ">=", dc, delay),
        mk(FWR_SYNC_DELAY_LE_M_DOUT_DC, sync && fwr, "<=", m as u64 * dout * dc, delay),
        mk(ASYNC_TRANSMISSIONS_GE_N_MINUS_1, !sync && m == 1, ">=", n as u64 - 1, sent),
        mk(FWR_TRANSMISSIONS_LE_M_EDGES, fwr, "<=", m as u64 * edges, sent),
        mk(FWR_TRANSMISSIONS_LE_M_N_DOUT, fwr, "<=", m as u64 * n as u64 * dout, sent),
        mk(ASYNC_TRANSMISSIONS_LE_DELAY, !sync, "<=", delay, sent),
        mk(SYNC_TRANSMISSIONS_LE_N_DELAY, sync, "<=", n as u64 * delay, sent),
    ])
}

/// Default run budget: `factor · m · n · max(𝖽, log₂ n) · 16`.
pub fn default_budget(g: &DiGraph, m: usize, factor: u64) -> u64 {
    let n = g.n() as u64;
    let spread = (g.max_out_degree() as u64).max(ceil_log2(g.n())).max(1);
    factor.max(1) * m as u64 * n * spread * 16
}

/// Order statistics with linear interpolation between neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    pub fn from_values(values: &[u64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        sorted.sort_by(f64::total_cmp);
        Some(Stats {
            count: sorted.len(),
            min: sorted[0],
            q25: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        })
    }
}

/// Quantile of sorted data, interpolating linearly at position q·(len−1).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Everything needed to run a batch of independent trials on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub protocol: ProtocolSpec,
    pub mode: Mode,
    pub m: usize,
    pub placement: PlacementMode,
    pub field: FieldKind,
    pub payload_len: usize,
    pub master_seed: u64,
    pub trials: usize,
    /// Rounds or ticks per trial; [`default_budget`] with factor 16 when unset.
    pub budget: Option<u64>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl TrialConfig {
    pub fn new(protocol: ProtocolSpec, mode: Mode, m: usize, trials: usize, master_seed: u64) -> Self {
        Self {
            protocol,
            mode,
            m,
            placement: PlacementMode::SingleSource(0),
            field: FieldKind::GF256,
            payload_len: crate::engine::DEFAULT_PAYLOAD_LEN,
            master_seed,
            trials,
            budget: None,
            jobs: None,
        }
    }
}

/// One row of a Monte Carlo batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub protocol: String,
    pub mode: Mode,
    pub covered: bool,
    pub delay: u64,
    pub transmissions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub graph: String,
    pub protocol: String,
    pub mode: Mode,
    pub n: usize,
    pub m: usize,
    pub master_seed: u64,
    pub trials: usize,
    pub covered: usize,
    pub covering_rate: f64,
    /// Over covered trials only.
    pub delay: Option<Stats>,
    pub transmissions: Option<Stats>,
    pub bound_violations: Vec<BoundReport>,
    pub records: Vec<TrialRecord>,
}

fn run_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T, ExperimentError> {
    match jobs {
        None => Ok(work()),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map(|pool| pool.install(work))
            .map_err(|e| ExperimentError::ConfigInvalid(e.to_string())),
    }
}

/// Every trial's record, with its bound report when it covered.
pub(crate) fn run_trials(
    g: &DiGraph,
    graph_label: &str,
    cfg: &TrialConfig,
) -> Result<Vec<(TrialRecord, Option<BoundReport>)>, ExperimentError> {
    if cfg.trials == 0 {
        return Err(ExperimentError::ConfigInvalid("trials must be at least 1".into()));
    }
    if cfg.m == 0 {
        return Err(ExperimentError::ConfigInvalid("m must be at least 1".into()));
    }
    let field = Field::new(cfg.field).map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
    let budget = cfg.budget.unwrap_or_else(|| default_budget(g, cfg.m, 16));
    run_pool(cfg.jobs, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| -> Result<_, ExperimentError> {
                let seed = trial_seed(cfg.master_seed, trial as u64);
                let placement = Placement::resolve(&cfg.placement, g, cfg.m, seed)?;
                let sim = Simulation::new(g, cfg.protocol, &field, cfg.payload_len, &placement, seed)?;
                let metrics = sim.run(cfg.mode, &RunOptions::with_budget(budget))?.metrics;
                let report = if metrics.covered {
                    let checks = check_bounds(g, &placement, &cfg.protocol, cfg.mode, &metrics)?;
                    Some(BoundReport {
                        run: RunIdentity {
                            graph: graph_label.to_string(),
                            protocol: cfg.protocol.name().to_string(),
                            mode: cfg.mode,
                            m: cfg.m,
                            seed,
                        },
                        checks,
                    })
                } else {
                    None
                };
                let record = TrialRecord {
                    trial,
                    seed,
                    n: g.n(),
                    m: cfg.m,
                    protocol: cfg.protocol.name().to_string(),
                    mode: cfg.mode,
                    covered: metrics.covered,
                    delay: metrics.delay,
                    transmissions: metrics.transmissions,
                };
                Ok((record, report))
            })
            .collect::<Result<Vec<_>, _>>()
    })?
}

/// Runs `cfg.trials` seeded trials and aggregates them in trial order.
/// Bounds are checked on every covered trial.
pub fn monte_carlo(g: &DiGraph, graph_label: &str, cfg: &TrialConfig) -> Result<Summary, ExperimentError> {
    let results = run_trials(g, graph_label, cfg)?;
    let mut records = Vec::with_capacity(cfg.trials);
    let mut bound_violations = Vec::new();
    for (record, report) in results {
        if let Some(report) = report.filter(|rep| !rep.all_pass()) {
            bound_violations.push(report);
        }
        records.push(record);
    }
    let covered_runs: Vec<_> = records.iter().filter(|r| r.covered).collect();
    let delays: Vec<u64> = covered_runs.iter().map(|r| r.delay).collect();
    let sent: Vec<u64> = covered_runs.iter().map(|r| r.transmissions).collect();
    Ok(Summary {
        graph: graph_label.to_string(),
        protocol: cfg.protocol.name().to_string(),
        mode: cfg.mode,
        n: g.n(),
        m: cfg.m,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        covered: covered_runs.len(),
        covering_rate: covered_runs.len() as f64 / cfg.trials as f64,
        delay: Stats::from_values(&delays),
        transmissions: Stats::from_values(&sent),
        bound_violations,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeReport {
    pub q: usize,
    pub depth: usize,
    pub n: usize,
    pub bound: u64,
    pub rounds: Vec<u64>,
    pub all_covered: bool,
    pub all_within_bound: bool,
}

/// Synchronous `fwr` on the pure q-ary tree with the rumor at the root.
pub fn tree_experiment(q: usize, depth: usize, trials: usize, master_seed: u64) -> Result<TreeReport, ExperimentError> {
    let g = FamilySpec::QaryTree { q, depth, pure: true }.generate()?;
    let bound = g.tree_bound(0)? as u64;
    let field = Field::gf256();
    let placement = Placement::single(0, 1);
    let budget = 4 * (bound + 1);
    let runs = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let sim = Simulation::new(&g, ProtocolSpec::FWR, &field, 1, &placement, trial_seed(master_seed, trial as u64))?;
            Ok(sim.run(Mode::Sync, &RunOptions::with_budget(budget))?.metrics)
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(TreeReport {
        q,
        depth,
        n: g.n(),
        bound,
        all_covered: runs.iter().all(|r| r.covered),
        all_within_bound: runs.iter().all(|r| r.covered && r.delay <= bound),
        rounds: runs.into_iter().map(|r| r.delay).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub protocol: String,
    pub trials: usize,
    /// Trials that ran out of budget; excluded from the quantiles.
    pub exhausted: usize,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub median_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub family: String,
    pub protocol: String,
    pub points: Vec<CurvePoint>,
}

impl GrowthCurve {
    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.median_over_n).collect()
    }

    pub fn strictly_increasing(&self) -> bool {
        self.ratios().windows(2).all(|w| w[0] < w[1])
    }

    pub fn fully_covered(&self) -> bool {
        self.points.iter().all(|p| p.exhausted == 0)
    }
}

pub const MIN_CURVE_TRIALS: usize = 30;

/// Asynchronous transmissions-to-cover for a single rumor at vertex 0, over a
/// ladder of sizes of one family.
pub fn growth_curve(
    family: &FamilySpec,
    protocol: &ProtocolSpec,
    sizes: &[usize],
    trials: usize,
    budget_factor: u64,
    master_seed: u64,
) -> Result<GrowthCurve, ExperimentError> {
    if trials < MIN_CURVE_TRIALS {
        return Err(ExperimentError::ConfigInvalid(format!("growth curves need at least {MIN_CURVE_TRIALS} trials")));
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::ConfigInvalid("sizes must be non-empty and strictly ascending".into()));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let g = family.with_size(n)?.generate()?;
        let mut cfg = TrialConfig::new(*protocol, Mode::Async, 1, trials, master_seed);
        cfg.budget = Some(default_budget(&g, 1, budget_factor));
        cfg.payload_len = 1;
        let summary = monte_carlo(&g, &family.with_size(n)?.to_string(), &cfg)?;
        let stats = summary.transmissions.ok_or_else(|| {
            ExperimentError::ConfigInvalid(format!("no trial covered n = {n}; raise the budget factor"))
        })?;
        points.push(CurvePoint {
            n: g.n(),
            protocol: protocol.name().to_string(),
            trials,
            exhausted: trials - summary.covered,
            q25: stats.q25,
            median: stats.median,
            q75: stats.q75,
            median_over_n: stats.median / g.n() as f64,
        });
    }
    Ok(GrowthCurve { family: family.to_string(), protocol: protocol.name().to_string(), points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub graph: String,
    pub baseline: String,
    pub challenger: String,
    pub pairs: usize,
    pub baseline_median_delay: f64,
    pub challenger_median_delay: f64,
    /// Pairs where the challenger's delay was at least the baseline's.
    pub challenger_not_faster: usize,
    pub exhausted: usize,
}

/// Runs two protocols on identical trial seeds, so they share the tick
/// sequence and each vertex's port stream.
pub fn paired_delays(
    g: &DiGraph,
    graph_label: &str,
    baseline: ProtocolSpec,
    challenger: ProtocolSpec,
    pairs: usize,
    master_seed: u64,
) -> Result<PairedComparison, ExperimentError> {
    let mut a = TrialConfig::new(baseline, Mode::Async, 1, pairs, master_seed);
    a.budget = Some(default_budget(g, 1, 64));
    let mut b = a.clone();
    b.protocol = challenger;
    let ra = monte_carlo(g, graph_label, &a)?;
    let rb = monte_carlo(g, graph_label, &b)?;
    let median = |s: &Summary| s.delay.map_or(f64::INFINITY, |d| d.median);
    Ok(PairedComparison {
        graph: graph_label.to_string(),
        baseline: baseline.name().to_string(),
        challenger: challenger.name().to_string(),
        pairs,
        baseline_median_delay: median(&ra),
        challenger_median_delay: median(&rb),
        challenger_not_faster: ra
            .records
            .iter()
            .zip(&rb.records)
            .filter(|(x, y)| x.covered && y.covered && y.delay >= x.delay)
            .count(),
        exhausted: (pairs - ra.covered) + (pairs - rb.covered),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub s: u64,
    /// min over v of the empirical P*_s(v).
    pub min_empirical: f64,
    pub argmin: Vertex,
    /// Vertex with the most slack against its bound.
    pub witness: Vertex,
    pub witness_empirical: f64,
    /// 1 − exp(−2 s d^out(G) d^in(v) / n) at the witness.
    pub witness_bound: f64,
    /// Half-width of the 99% Wilson interval at the witness.
    pub witness_half_width: f64,
    /// Some vertex's 99% interval reaches down to its bound.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub trials: usize,
    pub points: Vec<TailPoint>,
}

/// Empirical probability that each vertex holds the rumor after at most `s`
/// transmissions of asynchronous `for`, against the per-vertex tail bound.
pub fn tail_probability(
    g: &DiGraph,
    source: Vertex,
    s_grid: &[u64],
    trials: usize,
    master_seed: u64,
) -> Result<TailCurve, ExperimentError> {
    if trials == 0 || s_grid.is_empty() {
        return Err(ExperimentError::ConfigInvalid("need trials and at least one s".into()));
    }
    let s_max = *s_grid.iter().max().expect("non-empty");
    let n = g.n();
    let field = Field::gf256();
    let placement = Placement::single(source, 1);
    let opts = RunOptions {
        budget: u64::MAX,
        stop: StopRule::Covered,
        max_transmissions: Some(s_max),
        trace: false,
    };
    let runs = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let sim = Simulation::new(g, ProtocolSpec::For, &field, 1, &placement, trial_seed(master_seed, trial as u64))?;
            Ok(sim.run(Mode::Async, &opts)?.metrics.cover_transmissions)
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let dout = g.max_out_degree() as f64;
    let points = s_grid
        .iter()
        .map(|&s| {
            let hits: Vec<usize> = (0..n)
                .map(|v| runs.iter().filter(|r| r[v].is_some_and(|at| at <= s)).count())
                .collect();
            let freq = |v: usize| hits[v] as f64 / trials as f64;
            let bound = |v: usize| 1.0 - (-2.0 * s as f64 * dout * g.in_degree(v) as f64 / n as f64).exp();
            let argmin = (0..n).min_by(|&a, &b| freq(a).total_cmp(&freq(b))).expect("n >= 1");
            let slack = |v: usize| bound(v) - wilson_interval(hits[v], trials, Z_99).0;
            let witness = (0..n).max_by(|&a, &b| slack(a).total_cmp(&slack(b))).expect("n >= 1");
            let (lo, hi) = wilson_interval(hits[witness], trials, Z_99);
            TailPoint {
                s,
                min_empirical: freq(argmin),
                argmin,
                witness,
                witness_empirical: freq(witness),
                witness_bound: bound(witness),
                witness_half_width: (hi - lo) / 2.0,
                consistent: slack(witness) >= 0.0,
            }
        })
        .collect();
    Ok(TailCurve { trials, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub s: u64,
    pub empirical: f64,
    /// 1 − (1 − α)^s.
    pub theoretical: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub trials: usize,
    pub alpha: f64,
    pub alpha_points: Vec<AlphaPoint>,
    /// Trials in which the α-protocol had not covered after 30 opportunities.
    pub alpha_uncovered_after_30: f64,
    /// (1 − α)^30.
    pub alpha_uncovered_theoretical: f64,
    pub twice_covering_frequency: f64,
    pub twice_mean_receipts: f64,
    pub fwr_covered_trials: usize,
    pub fwr_single_transmission_trials: usize,
    pub passed: bool,
}

pub const HIERARCHY_FREQUENCY_TOLERANCE: f64 = 0.02;
pub const HIERARCHY_RECEIPT_TOLERANCE: f64 = 0.03;
pub const MIN_HIERARCHY_TRIALS: usize = 10_000;
pub const ALPHA_GRID: [u64; 4] = [1, 2, 5, 10];

/// The two toy protocols and `fwr` on the two-vertex graph: almost-sure but
/// not sure covering, expected but not almost-sure covering, and sure
/// covering.
pub fn hierarchy_demo(trials: usize, master_seed: u64) -> Result<HierarchyReport, ExperimentError> {
    if trials < MIN_HIERARCHY_TRIALS {
        return Err(ExperimentError::ConfigInvalid(format!("the hierarchy demo needs at least {MIN_HIERARCHY_TRIALS} trials")));
    }
    let g = FamilySpec::Complete { n: 2 }.generate()?;
    let field = Field::gf256();
    let placement = Placement::single(0, 1);
    let alpha = 0.5;
    let long = 30u64;
    let batch = |protocol: ProtocolSpec, mode: Mode, opts: RunOptions| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let seed = trial_seed(master_seed, trial as u64);
                let sim = Simulation::new(&g, protocol, &field, 1, &placement, seed)?;
                Ok(sim.run(mode, &opts)?.metrics)
            })
            .collect::<Result<Vec<RunMetrics>, ExperimentError>>()
    };

    // One synchronous round is one opportunity for the holder.
    let alpha_runs = batch(ProtocolSpec::ToyAlpha { alpha }, Mode::Sync, RunOptions::with_budget(long))?;
    let covered_by = |s: u64| alpha_runs.iter().filter(|r| r.cover_time[1].is_some_and(|t| t <= s)).count() as f64 / trials as f64;
    let alpha_points: Vec<AlphaPoint> = ALPHA_GRID
        .iter()
        .map(|&s| {
            let empirical = covered_by(s);
            let theoretical = 1.0 - (1.0 - alpha).powi(s as i32);
            AlphaPoint { s, empirical, theoretical, within_tolerance: (empirical - theoretical).abs() <= HIERARCHY_FREQUENCY_TOLERANCE }
        })
        .collect();

    let twice_opts = RunOptions { stop: StopRule::Never, ..RunOptions::with_budget(8) };
    let twice = batch(ProtocolSpec::ToyTwice, Mode::Sync, twice_opts)?;
    let twice_cov = twice.iter().filter(|r| r.receptions[1] > 0).count() as f64 / trials as f64;
    let twice_mean = twice.iter().map(|r| r.receptions[1]).sum::<u64>() as f64 / trials as f64;

    let fwr = batch(ProtocolSpec::FWR, Mode::Async, RunOptions::with_budget(10_000))?;
    let fwr_covered = fwr.iter().filter(|r| r.covered).count();
    let fwr_single = fwr.iter().filter(|r| r.covered && r.transmissions == 1).count();

    let passed = alpha_points.iter().all(|p| p.within_tolerance)
        && (twice_cov - 0.5).abs() <= HIERARCHY_FREQUENCY_TOLERANCE
        && (twice_mean - 1.0).abs() <= HIERARCHY_RECEIPT_TOLERANCE
        && fwr_covered == trials
        && fwr_single == trials;
    Ok(HierarchyReport {
        trials,
        alpha,
        alpha_points,
        alpha_uncovered_after_30: 1.0 - covered_by(long),
        alpha_uncovered_theoretical: (1.0 - alpha).powi(long as i32),
        twice_covering_frequency: twice_cov,
        twice_mean_receipts: twice_mean,
        fwr_covered_trials: fwr_covered,
        fwr_single_transmission_trials: fwr_single,
        passed,
    })
}

/// Graph set for the bound battery: every family, sizes up to `max_n`.
pub fn bound_graph_set(max_n: usize) -> Vec<FamilySpec> {
    let mut out = Vec::new();
    for n in [2, 5, 16, 64, 200, 512] {
        if n <= max_n {
            out.push(FamilySpec::Chain { n });
        }
    }
    for n in [3, 10, 33, 128, 512] {
        if n <= max_n {
            out.push(FamilySpec::Ring { n });
        }
    }
    for side in [3, 5, 8, 16, 22] {
        if side * side <= max_n {
            out.push(FamilySpec::Torus { rows: side, cols: side + usize::from(side % 2 == 0) });
        }
    }
    for (q, depth) in [(2, 2), (2, 5), (3, 3), (2, 8), (3, 5)] {
        let spec = FamilySpec::QaryTree { q, depth, pure: false };
        if spec.generate().map(|g| g.n() <= max_n).unwrap_or(false) {
            out.push(spec);
        }
    }
    for n in [2, 8, 32] {
        if n <= max_n {
            out.push(FamilySpec::Complete { n });
        }
    }
    for (n, d) in [(16, 2), (100, 3), (256, 4), (512, 3)] {
        if n <= max_n {
            out.push(FamilySpec::RandomRegular { n, d, seed: n as u64 + d as u64 });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fam(s: &str) -> DiGraph {
        s.parse::<FamilySpec>().unwrap().generate().unwrap()
    }

    fn metrics(delay: u64, transmissions: u64) -> RunMetrics {
        RunMetrics {
            delay,
            transmissions,
            covered: true,
            quiescent: None,
            cover_time: vec![],
            cover_transmissions: vec![],
            receptions: vec![],
        }
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!([1, 2, 3, 4, 5, 8, 9].map(ceil_log2), [0, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn bound_values_from_structure() {
        let g = fam("ring:10");
        let checks = check_bounds(&g, &Placement::single(0, 1), &ProtocolSpec::FWR, Mode::Async, &metrics(100, 20)).unwrap();
        let get = |n: &str| checks.iter().find(|c| c.name == n).unwrap().clone();
        assert_eq!(get(FWR_TRANSMISSIONS_LE_M_EDGES).theoretical, 20);
        assert_eq!(get(FWR_TRANSMISSIONS_LE_M_EDGES).status, BoundStatus::Pass);
        assert_eq!(get(ASYNC_TRANSMISSIONS_GE_N_MINUS_1).theoretical, 9);
        assert_eq!(get(SYNC_DELAY_GE_LOG2_N).status, BoundStatus::NotApplicable);

        let over = check_bounds(&g, &Placement::single(0, 1), &ProtocolSpec::FWR, Mode::Async, &metrics(100, 21)).unwrap();
        assert!(over.iter().any(|c| c.name == FWR_TRANSMISSIONS_LE_M_EDGES && c.status == BoundStatus::Fail));

        let chain = fam("chain:8");
        let sync = check_bounds(&chain, &Placement::single(0, 1), &ProtocolSpec::For, Mode::Sync, &metrics(6, 6)).unwrap();
        let dc = sync.iter().find(|c| c.name == SYNC_DELAY_GE_BITSTRING_DIAMETER).unwrap();
        assert_eq!((dc.theoretical, dc.status), (7, BoundStatus::Fail));
        let k8 = fam("complete:8");
        let sync = check_bounds(&k8, &Placement::single(0, 1), &ProtocolSpec::Nca, Mode::Sync, &metrics(3, 9)).unwrap();
        let lg = sync.iter().find(|c| c.name == SYNC_DELAY_GE_LOG2_N).unwrap();
        assert_eq!((lg.theoretical, lg.status), (3, BoundStatus::Pass));

        let mut uncovered = metrics(1, 1);
        uncovered.covered = false;
        assert_eq!(
            check_bounds(&g, &Placement::single(0, 1), &ProtocolSpec::For, Mode::Sync, &uncovered),
            Err(ExperimentError::RunNotCovered)
        );
    }

    #[test]
    fn quantiles_interpolate() {
        let s = Stats::from_values(&[1, 2, 3, 4]).unwrap();
        assert_eq!((s.min, s.q25, s.median, s.q75, s.max), (1.0, 1.75, 2.5, 3.25, 4.0));
        assert!(Stats::from_values(&[]).is_none());
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        let (lo, hi) = wilson_interval(50, 100, Z_99);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!((hi - lo) / 2.0 < 0.13);
        let (lo0, hi0) = wilson_interval(0, 1000, Z_99);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.01);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let g = fam("ring:12");
        let mut cfg = TrialConfig::new(ProtocolSpec::FWR, Mode::Async, 2, 100, 42);
        cfg.placement = PlacementMode::DistinctRandom(None);
        let a = serde_json::to_string(&monte_carlo(&g, "ring:12", &cfg).unwrap()).unwrap();
        cfg.jobs = Some(3);
        let b = serde_json::to_string(&monte_carlo(&g, "ring:12", &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_summary_brackets_trials() {
        let g = fam("complete:8");
        let cfg = TrialConfig::new(ProtocolSpec::FWR, Mode::Async, 2, 60, 5);
        let s = monte_carlo(&g, "complete:8", &cfg).unwrap();
        assert_eq!(s.covered, 60);
        let t = s.transmissions.unwrap();
        for r in &s.records {
            assert!(t.min <= r.transmissions as f64 && r.transmissions as f64 <= t.max);
            assert!(r.transmissions <= 112);
        }
        assert!(t.min <= t.q25 && t.q25 <= t.median && t.median <= t.q75 && t.q75 <= t.max);
        assert!(s.bound_violations.is_empty());
        assert!(monte_carlo(&g, "x", &TrialConfig::new(ProtocolSpec::FWR, Mode::Async, 2, 0, 5)).is_err());
    }

    #[test]
    fn tree_experiment_small_cases() {
        let r = tree_experiment(2, 2, 50, 1).unwrap();
        assert_eq!(r.bound, 4);
        assert!(r.all_within_bound);
        let r0 = tree_experiment(3, 0, 5, 1).unwrap();
        assert_eq!(r0.bound, 0);
        assert!(r0.rounds.iter().all(|&x| x == 0));
        let r3 = tree_experiment(3, 3, 100, 2).unwrap();
        assert_eq!(r3.bound, 9);
        assert!(r3.all_within_bound);
    }

    #[test]
    fn growth_curve_preconditions() {
        let chain = FamilySpec::Chain { n: 2 };
        assert!(growth_curve(&chain, &ProtocolSpec::FWR, &[16, 32], 10, 16, 0).is_err());
        assert!(growth_curve(&chain, &ProtocolSpec::FWR, &[32, 16], 30, 16, 0).is_err());
        let c = growth_curve(&chain, &ProtocolSpec::FWR, &[8, 16, 32], 30, 16, 0).unwrap();
        assert!(c.fully_covered());
        assert!(c.ratios().iter().all(|&r| r <= 2.0));
    }

    #[test]
    fn tail_probability_edges() {
        let g = fam("chain:16");
        let curve = tail_probability(&g, 0, &[0, 15, 100_000], 200, 3).unwrap();
        let zero = &curve.points[0];
        assert_eq!(zero.min_empirical, 0.0);
        assert!(zero.consistent);
        // Reaching the far end of a chain of 16 needs 15 transmissions.
        assert!(curve.points[1].min_empirical <= 1.0);
        assert_eq!(curve.points[2].min_empirical, 1.0);
        assert!(curve.points.iter().all(|p| p.consistent));
    }

    #[test]
    fn tail_bound_consistent_on_chain() {
        let g = fam("chain:32");
        let curve = tail_probability(&g, 0, &[32], 1000, 11).unwrap();
        let p = &curve.points[0];
        assert!(p.consistent);
        assert!(p.witness_empirical <= p.witness_bound + p.witness_half_width);
    }

    #[test]
    fn hierarchy_demo_separates_the_three_problems() {
        assert!(hierarchy_demo(100, 0).is_err());
        let r = hierarchy_demo(MIN_HIERARCHY_TRIALS, 17).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.alpha_uncovered_after_30 - r.alpha_uncovered_theoretical).abs() < 1e-3);
    }

    #[test]
    fn nca_never_beats_for_on_paired_seeds() {
        let g = fam("ring:12");
        let cmp = paired_delays(&g, "ring:12", ProtocolSpec::For, ProtocolSpec::Nca, 60, 9).unwrap();
        assert_eq!(cmp.exhausted, 0);
        assert_eq!(cmp.challenger_not_faster, 60);
        assert!(cmp.challenger_median_delay >= cmp.baseline_median_delay);
    }

    #[test]
    fn graph_set_is_valid() {
        for spec in bound_graph_set(512) {
            let g = spec.generate().unwrap();
            assert!(g.is_strongly_connected(), "{spec}");
            assert!(g.n() <= 512);
        }
    }

    fn family() -> impl Strategy<Value = FamilySpec> {
        prop_oneof![
            (2usize..12).prop_map(|n| FamilySpec::Chain { n }),
            (3usize..12).prop_map(|n| FamilySpec::Ring { n }),
            (3usize..5, 3usize..5).prop_map(|(rows, cols)| FamilySpec::Torus { rows, cols }),
            (1usize..4, 0usize..4).prop_map(|(q, depth)| FamilySpec::QaryTree { q, depth, pure: false }),
            (2usize..7).prop_map(|n| FamilySpec::Complete { n }),
            (4usize..16, 1usize..4, any::<u64>()).prop_map(|(n, d, seed)| FamilySpec::RandomRegular { n, d, seed }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn every_bound_holds_on_covered_runs(
            spec in family(),
            which in 0usize..3,
            sync in any::<bool>(),
            m in 1usize..4,
            seed in any::<u64>(),
        ) {
            let g = spec.generate().unwrap();
            let m = m.min(g.n());
            let protocol = [ProtocolSpec::For, ProtocolSpec::Nca, ProtocolSpec::FWR][which];
            let mode = if sync { Mode::Sync } else { Mode::Async };
            let placement = Placement::resolve(&PlacementMode::DistinctRandom(None), &g, m, seed).unwrap();
            let metrics = Simulation::new(&g, protocol, &Field::gf256(), 2, &placement, seed)
                .unwrap()
                .run(mode, &RunOptions::with_budget(default_budget(&g, m, 64)))
                .unwrap()
                .metrics;
            prop_assume!(metrics.covered);
            for c in check_bounds(&g, &placement, &protocol, mode, &metrics).unwrap() {
                prop_assert_ne!(c.status, BoundStatus::Fail, "{:?}", c);
            }
        }

        #[test]
        fn stats_bracket_their_values(values in proptest::collection::vec(0u64..1000, 1..50)) {
            let s = Stats::from_values(&values).unwrap();
            prop_assert!(s.min <= s.q25 && s.q25 <= s.median && s.median <= s.q75 && s.q75 <= s.max);
            prop_assert!(s.min <= s.mean && s.mean <= s.max);
            prop_assert_eq!(s.min, *values.iter().min().unwrap() as f64);
        }

        #[test]
        fn wilson_interval_contains_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
            let k = ((trials as f64) * frac).floor() as usize;
            let (lo, hi) = wilson_interval(k, trials, Z_99);
            let p = k as f64 / trials as f64;
            prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
        }
    }
}

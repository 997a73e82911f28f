//! Synchronous and asynchronous schedulers.
//!
//! Both schedulers enforce the gossip transmitter constraint: a vertex sends
//! at most one message per opportunity. Covering is judged by the harness,
//! never by the protocols.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gfield::{Field, GfVector};
use crate::graph::{DiGraph, Port, Vertex};
use crate::protocols::{LocalRng, Message, NodeState, ProtocolError, ProtocolSpec, Rumor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("budget must be at least 1")]
    InvalidBudget,
    #[error("toy protocols run on the two-vertex graph with a single rumor")]
    ToyContext,
    #[error("run was executed without tracing")]
    TracingDisabled,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

const SCHEDULER_STREAM: u64 = 0;
const PAYLOAD_STREAM: u64 = 1;
const PLACEMENT_STREAM: u64 = 2;
const FIRST_VERTEX_STREAM: u64 = 3;

/// Seed of one trial, derived from the master seed and the trial index.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Random streams of vertex `key` within a trial.
pub fn local_rng(seed: u64, key: Vertex) -> LocalRng {
    let base = FIRST_VERTEX_STREAM + 2 * key as u64;
    LocalRng { ports: stream(seed, base), content: stream(seed, base + 1) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sync,
    Async,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sync => "sync",
            Mode::Async => "async",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sync" => Ok(Mode::Sync),
            "async" => Ok(Mode::Async),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

/// How initial holders are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PlacementMode {
    /// Every rumor starts at the same vertex.
    SingleSource(Vertex),
    /// Rumors start at distinct uniformly chosen vertices. Without a fixed
    /// seed the trial seed is used.
    DistinctRandom(Option<u64>),
    /// Rumor `i` starts at the i-th listed vertex.
    Explicit(Vec<Vertex>),
}

impl fmt::Display for PlacementMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlacementMode::SingleSource(v) => write!(f, "single:{v}"),
            PlacementMode::DistinctRandom(None) => write!(f, "random"),
            PlacementMode::DistinctRandom(Some(seed)) => write!(f, "random:{seed}"),
            PlacementMode::Explicit(vs) => {
                let list: Vec<_> = vs.iter().map(ToString::to_string).collect();
                write!(f, "explicit:{}", list.join(","))
            }
        }
    }
}

impl FromStr for PlacementMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unrecognized placement `{s}`");
        match s.split_once(':') {
            None if s == "random" => Ok(PlacementMode::DistinctRandom(None)),
            None if s == "single" => Ok(PlacementMode::SingleSource(0)),
            Some(("single", v)) => v.parse().map(PlacementMode::SingleSource).map_err(|_| bad()),
            Some(("random", seed)) => seed.parse().map(|s| PlacementMode::DistinctRandom(Some(s))).map_err(|_| bad()),
            Some(("explicit", list)) => list
                .split(',')
                .map(|x| x.trim().parse())
                .collect::<Result<Vec<_>, _>>()
                .map(PlacementMode::Explicit)
                .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for PlacementMode {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PlacementMode> for String {
    fn from(p: PlacementMode) -> String {
        p.to_string()
    }
}

/// Initial holder of each rumor: rumor `i` starts at `holders()[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    holders: Vec<Vertex>,
}

impl Placement {
    pub fn new(holders: Vec<Vertex>) -> Self {
        Self { holders }
    }

    /// All `m` rumors at `v`.
    pub fn single(v: Vertex, m: usize) -> Self {
        Self { holders: vec![v; m] }
    }

    pub fn resolve(mode: &PlacementMode, g: &DiGraph, m: usize, seed: u64) -> Result<Self, EngineError> {
        let p = match mode {
            PlacementMode::SingleSource(v) => Self::single(*v, m),
            PlacementMode::Explicit(vs) => {
                if vs.len() != m {
                    return Err(EngineError::InvalidPlacement(format!("{} holders listed for m = {m}", vs.len())));
                }
                Self::new(vs.clone())
            }
            PlacementMode::DistinctRandom(fixed) => {
                if m > g.n() {
                    return Err(EngineError::InvalidPlacement(format!("m = {m} exceeds n = {}", g.n())));
                }
                let mut rng = stream(fixed.unwrap_or(seed), PLACEMENT_STREAM);
                Self::new(sample(&mut rng, g.n(), m).into_vec())
            }
        };
        p.validate(g)?;
        Ok(p)
    }

    pub fn validate(&self, g: &DiGraph) -> Result<(), EngineError> {
        if self.holders.is_empty() {
            return Err(EngineError::InvalidPlacement("at least one rumor is required".into()));
        }
        match self.holders.iter().find(|&&v| v >= g.n()) {
            Some(v) => Err(EngineError::InvalidPlacement(format!("holder {v} is not a vertex"))),
            None => Ok(()),
        }
    }

    pub fn holders(&self) -> &[Vertex] {
        &self.holders
    }

    pub fn m(&self) -> usize {
        self.holders.len()
    }
}

/// When a run stops before its budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    #[default]
    Covered,
    /// Every vertex is quiescent (for `fwr`: all (C×S)∖L empty).
    Quiescent,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Rounds (sync) or ticks (async).
    pub budget: u64,
    pub stop: StopRule,
    /// Also stop once this many transmissions happened.
    pub max_transmissions: Option<u64>,
    pub trace: bool,
}

impl RunOptions {
    pub fn with_budget(budget: u64) -> Self {
        Self { budget, stop: StopRule::Covered, max_transmissions: None, trace: false }
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }
}

/// Measured outcome of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Rounds (sync) or global ticks (async) executed.
    pub delay: u64,
    pub transmissions: u64,
    pub covered: bool,
    /// `fwr` only: every vertex had nothing left to send when the run ended.
    pub quiescent: Option<bool>,
    /// Round or tick at which each vertex became covered.
    pub cover_time: Vec<Option<u64>>,
    /// Transmission count at which each vertex became covered.
    pub cover_transmissions: Vec<Option<u64>>,
    /// Messages delivered to each vertex.
    pub receptions: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    /// Round (sync) or tick (async).
    pub time: u64,
    pub sender: Vertex,
    pub port: Port,
    pub receiver: Vertex,
    pub message: Message,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceLog {
    pub mode: Mode,
    pub seed: u64,
    pub field: Field,
    pub events: Vec<TraceEvent>,
}

impl TraceLog {
    /// One `time,sender,port,kind,rumor_id|header-hex` line per event.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let detail = match &e.message {
                Message::Plain { rumor, .. } => rumor.to_string(),
                Message::Coded { header, .. } => header.to_hex(&self.field),
            };
            out.push_str(&format!("{},{},{},{},{}\n", e.time, e.sender, e.port, e.message.kind(), detail));
        }
        out
    }

    /// Checks that every coded message satisfies c = Σ w_j · original_j.
    pub fn coded_messages_consistent(&self, rumors: &[Rumor]) -> bool {
        let originals: Vec<_> = rumors.iter().map(|r| r.payload.clone()).collect();
        let t = originals.first().map_or(0, GfVector::len);
        self.events.iter().all(|e| match &e.message {
            Message::Coded { payload, header } => {
                self.field.lincomb(header, &originals, t).is_ok_and(|c| &c == payload)
            }
            Message::Plain { rumor, payload } => rumors.get(*rumor).is_some_and(|r| &r.payload == payload),
        })
    }

    /// True if no vertex sent the same (rumor, port) pair twice.
    pub fn no_repeated_forwarding(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.events.iter().all(|e| match &e.message {
            Message::Plain { rumor, .. } => seen.insert((e.sender, *rumor, e.port)),
            Message::Coded { .. } => true,
        })
    }

    /// True if no vertex sent more than once in the same round or tick.
    pub fn transmitter_constraint_holds(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.events.iter().all(|e| seen.insert((e.time, e.sender)))
    }
}

/// Everything a finished run leaves behind.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub rumors: Vec<Rumor>,
    pub states: Vec<NodeState>,
    trace: Option<TraceLog>,
}

impl RunOutcome {
    pub fn audit_trace(&self) -> Result<&TraceLog, EngineError> {
        self.trace.as_ref().ok_or(EngineError::TracingDisabled)
    }
}

/// A single seeded trial, ready to run.
pub struct Simulation<'g> {
    graph: &'g DiGraph,
    protocol: ProtocolSpec,
    field: Field,
    seed: u64,
    rumors: Vec<Rumor>,
    states: Vec<NodeState>,
    rngs: Vec<LocalRng>,
    scheduler: ChaCha8Rng,
    /// Vertex picked when the scheduler draws index k.
    tick_order: Vec<Vertex>,
}

impl<'g> Simulation<'g> {
    /// `seed` is a trial seed (see [`trial_seed`]). Rumor payloads have
    /// length `t` and are drawn from `field`.
    pub fn new(
        graph: &'g DiGraph,
        protocol: ProtocolSpec,
        field: &Field,
        t: usize,
        placement: &Placement,
        seed: u64,
    ) -> Result<Self, EngineError> {
        let identity: Vec<Vertex> = (0..graph.n()).collect();
        Self::with_labeling(graph, protocol, field, t, placement, seed, &identity)
    }

    /// Like [`Simulation::new`], but vertex `w` uses the random streams and
    /// scheduler slot of vertex `original_of[w]`. Running a relabeled graph
    /// with the inverse labeling reproduces the original run up to renaming.
    pub fn with_labeling(
        graph: &'g DiGraph,
        protocol: ProtocolSpec,
        field: &Field,
        t: usize,
        placement: &Placement,
        seed: u64,
        original_of: &[Vertex],
    ) -> Result<Self, EngineError> {
        placement.validate(graph)?;
        protocol.validate()?;
        let n = graph.n();
        let m = placement.m();
        if protocol.is_toy() && (n != 2 || m != 1) {
            return Err(EngineError::ToyContext);
        }
        let mut tick_order = vec![usize::MAX; n];
        for (w, &orig) in original_of.iter().enumerate() {
            if orig >= n || tick_order[orig] != usize::MAX {
                return Err(EngineError::InvalidPlacement("labeling is not a permutation".into()));
            }
            tick_order[orig] = w;
        }
        if original_of.len() != n {
            return Err(EngineError::InvalidPlacement("labeling is not a permutation".into()));
        }
        let mut payload_rng = stream(seed, PAYLOAD_STREAM);
        let rumors: Vec<Rumor> = (0..m).map(|id| Rumor { id, payload: field.random_vector(t, &mut payload_rng) }).collect();
        let mut initial: Vec<Vec<Rumor>> = vec![Vec::new(); n];
        for (id, &h) in placement.holders().iter().enumerate() {
            initial[h].push(rumors[id].clone());
        }
        let states = (0..n)
            .map(|v| protocol.init_state(graph.out_degree(v), &initial[v], m, field, t))
            .collect::<Result<Vec<_>, _>>()?;
        let rngs = original_of.iter().map(|&k| local_rng(seed, k)).collect();
        Ok(Self {
            graph,
            protocol,
            field: field.clone(),
            seed,
            rumors,
            states,
            rngs,
            scheduler: stream(seed, SCHEDULER_STREAM),
            tick_order,
        })
    }

    pub fn rumors(&self) -> &[Rumor] {
        &self.rumors
    }

    pub fn run(self, mode: Mode, opts: &RunOptions) -> Result<RunOutcome, EngineError> {
        if opts.budget == 0 {
            return Err(EngineError::InvalidBudget);
        }
        let mut run = Runner::new(self, mode, opts);
        match mode {
            Mode::Sync => run.sync()?,
            Mode::Async => run.asynchronous()?,
        }
        Ok(run.finish())
    }
}

struct Runner<'g> {
    sim: Simulation<'g>,
    opts: RunOptions,
    m: usize,
    time: u64,
    transmissions: u64,
    cover_time: Vec<Option<u64>>,
    cover_transmissions: Vec<Option<u64>>,
    covered_count: usize,
    quiet: Vec<bool>,
    quiet_count: usize,
    receptions: Vec<u64>,
    trace: Option<TraceLog>,
}

impl<'g> Runner<'g> {
    fn new(sim: Simulation<'g>, mode: Mode, opts: &RunOptions) -> Self {
        let m = sim.rumors.len();
        let n = sim.graph.n();
        let cover_time: Vec<_> = sim.states.iter().map(|s| s.is_covered(m).then_some(0)).collect();
        let quiet: Vec<_> = sim.states.iter().map(NodeState::is_quiescent).collect();
        let trace = opts.trace.then(|| TraceLog { mode, seed: sim.seed, field: sim.field.clone(), events: Vec::new() });
        Self {
            covered_count: cover_time.iter().flatten().count(),
            cover_transmissions: cover_time.clone(),
            cover_time,
            quiet_count: quiet.iter().filter(|&&q| q).count(),
            quiet,
            receptions: vec![0; n],
            opts: *opts,
            m,
            time: 0,
            transmissions: 0,
            trace,
            sim,
        }
    }

    fn done(&self) -> bool {
        let n = self.sim.graph.n();
        let by_rule = match self.opts.stop {
            StopRule::Covered => self.covered_count == n,
            StopRule::Quiescent => self.quiet_count == n,
            StopRule::Never => false,
        };
        by_rule || self.opts.max_transmissions.is_some_and(|cap| self.transmissions >= cap)
    }

    fn refresh_quiet(&mut self, v: Vertex) {
        let q = self.sim.states[v].is_quiescent();
        if q != self.quiet[v] {
            self.quiet[v] = q;
            if q {
                self.quiet_count += 1;
            } else {
                self.quiet_count -= 1;
            }
        }
    }

    fn deliver(&mut self, sender: Vertex, port: Port, message: Message) -> Result<(), EngineError> {
        let receiver = self.sim.graph.successors(sender)[port];
        let view = self.sim.graph.edge_view(sender, port);
        self.sim.states[receiver].receive(&message, Some(view))?;
        self.receptions[receiver] += 1;
        if self.cover_time[receiver].is_none() && self.sim.states[receiver].is_covered(self.m) {
            self.cover_time[receiver] = Some(self.time);
            self.cover_transmissions[receiver] = Some(self.transmissions);
            self.covered_count += 1;
        }
        self.refresh_quiet(receiver);
        if let Some(trace) = self.trace.as_mut() {
            trace.events.push(TraceEvent { time: self.time, sender, port, receiver, message });
        }
        Ok(())
    }

    /// Two-phase rounds: every vertex decides on round-start state, then all
    /// messages are delivered.
    fn sync(&mut self) -> Result<(), EngineError> {
        let mut outgoing = Vec::new();
        while !self.done() && self.time < self.opts.budget {
            self.time += 1;
            for k in 0..self.tick_order_len() {
                let v = self.sim.tick_order[k];
                if let Some((port, msg)) = self.sim.states[v].transmit(&mut self.sim.rngs[v]) {
                    outgoing.push((v, port, msg));
                }
                self.refresh_quiet(v);
            }
            for (v, port, msg) in outgoing.drain(..) {
                self.transmissions += 1;
                self.deliver(v, port, msg)?;
            }
        }
        Ok(())
    }

    /// One uniformly drawn vertex per tick; delivery is immediate.
    fn asynchronous(&mut self) -> Result<(), EngineError> {
        let n = self.tick_order_len();
        while !self.done() && self.time < self.opts.budget {
            self.time += 1;
            let v = self.sim.tick_order[self.sim.scheduler.gen_range(0..n)];
            if let Some((port, msg)) = self.sim.states[v].transmit(&mut self.sim.rngs[v]) {
                self.transmissions += 1;
                self.deliver(v, port, msg)?;
            }
            self.refresh_quiet(v);
        }
        Ok(())
    }

    fn tick_order_len(&self) -> usize {
        self.sim.tick_order.len()
    }

    fn finish(self) -> RunOutcome {
        let n = self.sim.graph.n();
        let metrics = RunMetrics {
            delay: self.time,
            transmissions: self.transmissions,
            covered: self.covered_count == n,
            quiescent: self.sim.protocol.is_fwr().then_some(self.quiet_count == n),
            cover_time: self.cover_time,
            cover_transmissions: self.cover_transmissions,
            receptions: self.receptions,
        };
        RunOutcome { metrics, rumors: self.sim.rumors, states: self.sim.states, trace: self.trace }
    }
}

/// Payload length used when none is configured.
pub const DEFAULT_PAYLOAD_LEN: usize = 8;

fn run_default(
    g: &DiGraph,
    protocol: &ProtocolSpec,
    placement: &Placement,
    master_seed: u64,
    budget: u64,
    mode: Mode,
) -> Result<RunMetrics, EngineError> {
    let sim = Simulation::new(g, *protocol, &Field::gf256(), DEFAULT_PAYLOAD_LEN, placement, trial_seed(master_seed, 0))?;
    Ok(sim.run(mode, &RunOptions::with_budget(budget))?.metrics)
}

/// Synchronous run over GF(256) with t = 8, stopping at covering or after
/// `max_rounds` rounds.
pub fn run_sync(
    g: &DiGraph,
    protocol: &ProtocolSpec,
    placement: &Placement,
    master_seed: u64,
    max_rounds: u64,
) -> Result<RunMetrics, EngineError> {
    run_default(g, protocol, placement, master_seed, max_rounds, Mode::Sync)
}

/// Asynchronous run over GF(256) with t = 8, stopping at covering or after
/// `max_ticks` ticks.
pub fn run_async(
    g: &DiGraph,
    protocol: &ProtocolSpec,
    placement: &Placement,
    master_seed: u64,
    max_ticks: u64,
) -> Result<RunMetrics, EngineError> {
    run_default(g, protocol, placement, master_seed, max_ticks, Mode::Async)
}

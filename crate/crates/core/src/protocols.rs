//! Per-vertex gossip state machines.
//!
//! Every machine sees only its own state, its out-degree and the local port
//! on which it transmits. Each vertex owns two random streams: `ports` picks
//! the successor to call and `content` picks what to send. Keeping the two
//! layers on separate streams means two protocols that call successors at
//! the same moments also call the same successors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gfield::{DecodingBasis, Field, FieldError, GfVector};
use crate::graph::{EdgeView, Port};

pub type RumorId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("coded message delivered to a forwarding protocol")]
    CodedToPlainProtocol,
    #[error("plain message delivered to the network coding protocol")]
    PlainToCodedProtocol,
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("unknown protocol `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One of the m original bitstrings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rumor {
    pub id: RumorId,
    pub payload: GfVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Plain { rumor: RumorId, payload: GfVector },
    /// `payload = Σ header[j] · original[j]`.
    Coded { payload: GfVector, header: GfVector },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Plain { .. } => "plain",
            Message::Coded { .. } => "coded",
        }
    }
}

/// The two random streams of one vertex.
#[derive(Debug, Clone)]
pub struct LocalRng {
    pub ports: ChaCha8Rng,
    pub content: ChaCha8Rng,
}

/// Which protocol every vertex runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ProtocolSpec {
    For,
    Nca,
    Fwr {
        #[serde(default)]
        recv_suppress: bool,
        /// Mutation hook: never record sent pairs.
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        drop_sent_log: bool,
    },
    ToyAlpha { alpha: f64 },
    ToyTwice,
}

impl ProtocolSpec {
    pub const FWR: ProtocolSpec = ProtocolSpec::Fwr { recv_suppress: false, drop_sent_log: false };

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolSpec::For => "for",
            ProtocolSpec::Nca => "nca",
            ProtocolSpec::Fwr { .. } => "fwr",
            ProtocolSpec::ToyAlpha { .. } => "toy_alpha",
            ProtocolSpec::ToyTwice => "toy_twice",
        }
    }

    pub fn is_fwr(&self) -> bool {
        matches!(self, ProtocolSpec::Fwr { .. })
    }

    pub fn is_toy(&self) -> bool {
        matches!(self, ProtocolSpec::ToyAlpha { .. } | ProtocolSpec::ToyTwice)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        match *self {
            ProtocolSpec::ToyAlpha { alpha } if !(alpha > 0.0 && alpha <= 1.0) => Err(ProtocolError::InvalidAlpha(alpha)),
            _ => Ok(()),
        }
    }

    /// Initial state of a vertex holding `initial` rumors.
    pub fn init_state(
        &self,
        out_degree: usize,
        initial: &[Rumor],
        m: usize,
        field: &Field,
        t: usize,
    ) -> Result<NodeState, ProtocolError> {
        self.validate()?;
        Ok(match *self {
            ProtocolSpec::For => NodeState::For(ForState::new(out_degree, initial)),
            ProtocolSpec::Nca => NodeState::Nca(NcaState::new(field.clone(), m, t, out_degree, initial)?),
            ProtocolSpec::Fwr { recv_suppress, drop_sent_log } => {
                let mut s = FwrState::new(out_degree, recv_suppress, initial);
                s.drop_sent_log = drop_sent_log;
                NodeState::Fwr(s)
            }
            ProtocolSpec::ToyAlpha { alpha } => NodeState::ToyAlpha(ToyAlphaState::new(alpha, initial)?),
            ProtocolSpec::ToyTwice => NodeState::ToyTwice(ToyTwiceState::new(initial)),
        })
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolSpec {
    type Err = ProtocolError;

    /// Plain names. `toy_alpha` defaults to α = 0.5.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "for" => Ok(ProtocolSpec::For),
            "nca" => Ok(ProtocolSpec::Nca),
            "fwr" => Ok(ProtocolSpec::FWR),
            "toy_alpha" => Ok(ProtocolSpec::ToyAlpha { alpha: 0.5 }),
            "toy_twice" => Ok(ProtocolSpec::ToyTwice),
            _ => Err(ProtocolError::Unknown(s.to_string())),
        }
    }
}

fn plain(msg: &Message) -> Result<(RumorId, &GfVector), ProtocolError> {
    match msg {
        Message::Plain { rumor, payload } => Ok((*rumor, payload)),
        Message::Coded { .. } => Err(ProtocolError::CodedToPlainProtocol),
    }
}

/// Classical push forwarding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForState {
    known: BTreeMap<RumorId, GfVector>,
    out_degree: usize,
}

impl ForState {
    pub fn new(out_degree: usize, initial: &[Rumor]) -> Self {
        Self {
            known: initial.iter().map(|r| (r.id, r.payload.clone())).collect(),
            out_degree,
        }
    }

    pub fn known(&self) -> impl Iterator<Item = RumorId> + '_ {
        self.known.keys().copied()
    }

    pub fn known_count(&self) -> usize {
        self.known.len()
    }

    /// Uniform successor, then uniform rumor from C(v).
    pub fn transmit(&self, rng: &mut LocalRng) -> Option<(Port, Message)> {
        if self.known.is_empty() || self.out_degree == 0 {
            return None;
        }
        let port = rng.ports.gen_range(0..self.out_degree);
        let pick = rng.content.gen_range(0..self.known.len());
        let (&rumor, payload) = self.known.iter().nth(pick).expect("index below length");
        Some((port, Message::Plain { rumor, payload: payload.clone() }))
    }

    pub fn receive(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        let (rumor, payload) = plain(msg)?;
        self.known.entry(rumor).or_insert_with(|| payload.clone());
        Ok(())
    }
}

/// Random linear network coding.
#[derive(Debug, Clone)]
pub struct NcaState {
    field: Field,
    m: usize,
    t: usize,
    out_degree: usize,
    /// Raw log R(v) of (payload, header) pairs in arrival order.
    received: Vec<(GfVector, GfVector)>,
    basis: DecodingBasis,
    decoded: Option<Vec<GfVector>>,
}

impl NcaState {
    /// Initial holders log one unit-header row per rumor they start with.
    pub fn new(field: Field, m: usize, t: usize, out_degree: usize, initial: &[Rumor]) -> Result<Self, ProtocolError> {
        let mut s = Self {
            basis: DecodingBasis::new(field.clone(), m, t),
            field,
            m,
            t,
            out_degree,
            received: Vec::new(),
            decoded: None,
        };
        for r in initial {
            s.absorb(r.payload.clone(), GfVector::unit(m, r.id))?;
        }
        Ok(s)
    }

    pub fn raw_log(&self) -> &[(GfVector, GfVector)] {
        &self.received
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn decoded(&self) -> Option<&[GfVector]> {
        self.decoded.as_deref()
    }

    /// Like [`NcaState::transmit`], also returning the drawn coefficients α.
    pub fn transmit_with_coefficients(&self, rng: &mut LocalRng) -> Option<(Port, Message, GfVector)> {
        if self.received.is_empty() || self.out_degree == 0 {
            return None;
        }
        let port = rng.ports.gen_range(0..self.out_degree);
        let alpha = self.field.random_vector(self.received.len(), &mut rng.content);
        let mut payload = GfVector::zeros(self.t);
        let mut header = GfVector::zeros(self.m);
        for (&a, (c, w)) in alpha.as_slice().iter().zip(&self.received) {
            self.field.axpy(&mut payload, a, c).expect("payload length t");
            self.field.axpy(&mut header, a, w).expect("header length m");
        }
        Some((port, Message::Coded { payload, header }, alpha))
    }

    /// Uniform α over the raw log, uniform successor. Silent while r = 0.
    pub fn transmit(&self, rng: &mut LocalRng) -> Option<(Port, Message)> {
        self.transmit_with_coefficients(rng).map(|(p, msg, _)| (p, msg))
    }

    pub fn receive(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        match msg {
            Message::Coded { payload, header } => self.absorb(payload.clone(), header.clone()),
            Message::Plain { .. } => Err(ProtocolError::PlainToCodedProtocol),
        }
    }

    fn absorb(&mut self, payload: GfVector, header: GfVector) -> Result<(), ProtocolError> {
        self.basis.insert(&header, &payload)?;
        self.received.push((payload, header));
        if self.decoded.is_none() && self.basis.is_full() {
            self.decoded = Some(self.basis.solve()?);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct FwrEntry {
    payload: GfVector,
    sent: Vec<bool>,
    sent_count: usize,
}

/// Forwarding without repeating.
///
/// With `recv_suppress` off (the default) receipts never touch L(v). With it
/// on, a rumor received from a vertex that is also a successor marks that
/// (rumor, port) pair as already sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FwrState {
    known: BTreeMap<RumorId, FwrEntry>,
    out_degree: usize,
    recv_suppress: bool,
    drop_sent_log: bool,
    /// P(v): predecessor indices heard from. Recorded, never consulted.
    heard_from: BTreeSet<usize>,
    pending: usize,
}

impl FwrState {
    pub fn new(out_degree: usize, recv_suppress: bool, initial: &[Rumor]) -> Self {
        let mut s = Self {
            known: BTreeMap::new(),
            out_degree,
            recv_suppress,
            drop_sent_log: false,
            heard_from: BTreeSet::new(),
            pending: 0,
        };
        for r in initial {
            s.learn(r.id, &r.payload);
        }
        s
    }

    fn learn(&mut self, rumor: RumorId, payload: &GfVector) -> &mut FwrEntry {
        let d = self.out_degree;
        let pending = &mut self.pending;
        self.known.entry(rumor).or_insert_with(|| {
            *pending += d;
            FwrEntry { payload: payload.clone(), sent: vec![false; d], sent_count: 0 }
        })
    }

    fn mark_sent(&mut self, rumor: RumorId, port: Port) {
        let entry = self.known.get_mut(&rumor).expect("marked rumors are known");
        if !entry.sent[port] {
            entry.sent[port] = true;
            entry.sent_count += 1;
            self.pending -= 1;
        }
    }

    pub fn known(&self) -> impl Iterator<Item = RumorId> + '_ {
        self.known.keys().copied()
    }

    pub fn known_count(&self) -> usize {
        self.known.len()
    }

    /// |(C(v) × S(v)) \ L(v)|.
    pub fn pending(&self) -> usize {
        self.pending
    }

    /// L(v) in (rumor, port) order.
    pub fn sent_log(&self) -> Vec<(RumorId, Port)> {
        self.known
            .iter()
            .flat_map(|(&r, e)| e.sent.iter().enumerate().filter(|(_, &s)| s).map(move |(p, _)| (r, p)))
            .collect()
    }

    pub fn heard_from(&self) -> &BTreeSet<usize> {
        &self.heard_from
    }

    /// Uniform pair from (C(v) × S(v)) \ L(v), enumerated in (rumor, port)
    /// order; the pair is recorded in L(v).
    pub fn transmit(&mut self, rng: &mut LocalRng) -> Option<(Port, Message)> {
        if self.pending == 0 {
            return None;
        }
        let mut k = rng.ports.gen_range(0..self.pending);
        let d = self.out_degree;
        let mut choice = None;
        for (&rumor, entry) in &self.known {
            let open = d - entry.sent_count;
            if k >= open {
                k -= open;
                continue;
            }
            let port = entry
                .sent
                .iter()
                .enumerate()
                .filter(|(_, &s)| !s)
                .nth(k)
                .map(|(p, _)| p)
                .expect("k below the open count");
            choice = Some((rumor, port, entry.payload.clone()));
            break;
        }
        let (rumor, port, payload) = choice.expect("pending pairs exist");
        if !self.drop_sent_log {
            self.mark_sent(rumor, port);
        }
        Some((port, Message::Plain { rumor, payload }))
    }

    pub fn receive(&mut self, msg: &Message, from: Option<EdgeView>) -> Result<(), ProtocolError> {
        let (rumor, payload) = plain(msg)?;
        self.learn(rumor, payload);
        if let Some(view) = from {
            self.heard_from.insert(view.pred_index);
            if let (true, false, Some(port)) = (self.recv_suppress, self.drop_sent_log, view.back_port) {
                self.mark_sent(rumor, port);
            }
        }
        Ok(())
    }
}

/// Holder sends its rumor with probability α at every opportunity, forever.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyAlphaState {
    alpha: f64,
    own: Option<Rumor>,
    known: BTreeSet<RumorId>,
}

impl ToyAlphaState {
    pub fn new(alpha: f64, initial: &[Rumor]) -> Result<Self, ProtocolError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ProtocolError::InvalidAlpha(alpha));
        }
        Ok(Self { alpha, own: initial.first().cloned(), known: initial.iter().map(|r| r.id).collect() })
    }

    pub fn transmit(&self, rng: &mut LocalRng) -> Option<(Port, Message)> {
        let own = self.own.as_ref()?;
        rng.content
            .gen_bool(self.alpha)
            .then(|| (0, Message::Plain { rumor: own.id, payload: own.payload.clone() }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TwicePhase {
    Undecided,
    OneMore,
    Done,
}

/// On its first opportunity the holder flips a fair coin: heads sends the
/// rumor on that and the next opportunity, tails never sends.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyTwiceState {
    own: Option<Rumor>,
    phase: TwicePhase,
    known: BTreeSet<RumorId>,
}

impl ToyTwiceState {
    pub fn new(initial: &[Rumor]) -> Self {
        Self { own: initial.first().cloned(), phase: TwicePhase::Undecided, known: initial.iter().map(|r| r.id).collect() }
    }

    pub fn transmit(&mut self, rng: &mut LocalRng) -> Option<(Port, Message)> {
        let own = self.own.as_ref()?;
        let send = match self.phase {
            TwicePhase::Undecided => {
                let heads = rng.content.gen_bool(0.5);
                self.phase = if heads { TwicePhase::OneMore } else { TwicePhase::Done };
                heads
            }
            TwicePhase::OneMore => {
                self.phase = TwicePhase::Done;
                true
            }
            TwicePhase::Done => false,
        };
        send.then(|| (0, Message::Plain { rumor: own.id, payload: own.payload.clone() }))
    }
}

/// State of one vertex under any of the protocols.
#[derive(Debug, Clone)]
pub enum NodeState {
    For(ForState),
    Nca(NcaState),
    Fwr(FwrState),
    ToyAlpha(ToyAlphaState),
    ToyTwice(ToyTwiceState),
}

impl NodeState {
    pub fn transmit(&mut self, rng: &mut LocalRng) -> Option<(Port, Message)> {
        match self {
            NodeState::For(s) => s.transmit(rng),
            NodeState::Nca(s) => s.transmit(rng),
            NodeState::Fwr(s) => s.transmit(rng),
            NodeState::ToyAlpha(s) => s.transmit(rng),
            NodeState::ToyTwice(s) => s.transmit(rng),
        }
    }

    pub fn receive(&mut self, msg: &Message, from: Option<EdgeView>) -> Result<(), ProtocolError> {
        match self {
            NodeState::For(s) => s.receive(msg),
            NodeState::Nca(s) => s.receive(msg),
            NodeState::Fwr(s) => s.receive(msg, from),
            NodeState::ToyAlpha(ToyAlphaState { known, .. }) | NodeState::ToyTwice(ToyTwiceState { known, .. }) => {
                known.insert(plain(msg)?.0);
                Ok(())
            }
        }
    }

    /// Covering as judged by the harness, which knows m. Forwarding states are
    /// covered once they know m distinct ids; coding states once decoded.
    pub fn is_covered(&self, m: usize) -> bool {
        match self {
            NodeState::For(s) => s.known.len() == m,
            NodeState::Nca(s) => s.decoded.is_some(),
            NodeState::Fwr(s) => s.known.len() == m,
            NodeState::ToyAlpha(s) => s.known.len() == m,
            NodeState::ToyTwice(s) => s.known.len() == m,
        }
    }

    /// True when the vertex will stay silent until it receives something new.
    pub fn is_quiescent(&self) -> bool {
        match self {
            NodeState::For(s) => s.known.is_empty() || s.out_degree == 0,
            NodeState::Nca(s) => s.received.is_empty() || s.out_degree == 0,
            NodeState::Fwr(s) => s.pending == 0,
            NodeState::ToyAlpha(s) => s.own.is_none(),
            NodeState::ToyTwice(s) => s.own.is_none() || s.phase == TwicePhase::Done,
        }
    }
}

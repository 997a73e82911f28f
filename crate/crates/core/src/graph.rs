//! Directed graphs, family generators and structural metrics.
//!
//! Vertex ids are global integers inside the harness. Protocol state
//! machines never see them: they address neighbors through local ports,
//! i.e. positions in a vertex's successor list.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;

/// Index into a vertex's successor list.
pub type Port = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("graph is not strongly connected: no path from {from} to {to}")]
    NotStronglyConnected { from: Vertex, to: Vertex },
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("invalid family parameters: {0}")]
    InvalidParams(String),
    #[error("graph is not a rooted tree from vertex {0}")]
    NotATree(Vertex),
    #[error("holder set is empty")]
    EmptyHolders,
    #[error("graph file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Where an edge `(u, v)` lands from the receiver's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeView {
    /// Position of `u` in `v`'s predecessor list.
    pub pred_index: usize,
    /// Position of `u` in `v`'s successor list, when `(v, u)` is also an edge.
    pub back_port: Option<Port>,
}

/// Directed graph without self-loops or parallel edges.
///
/// Successor lists keep the order in which edges were supplied; that order
/// defines the local ports. Predecessor lists are the exact transpose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    succ: Vec<Vec<Vertex>>,
    pred: Vec<Vec<Vertex>>,
    views: Vec<Vec<EdgeView>>,
    edge_count: usize,
    root: Vertex,
    strongly_connected: bool,
}

impl DiGraph {
    /// Builds a strongly connected digraph.
    pub fn new(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        let g = Self::assemble(n, edges, 0)?;
        if let Some((from, to)) = g.first_unreachable_pair() {
            return Err(GraphError::NotStronglyConnected { from, to });
        }
        Ok(g)
    }

    /// Builds a digraph in which every vertex is reachable from `root`, without
    /// requiring the reverse. Used for pure rooted trees.
    pub fn new_rooted(n: usize, edges: &[(Vertex, Vertex)], root: Vertex) -> Result<Self, GraphError> {
        if root >= n.max(1) {
            return Err(GraphError::VertexOutOfRange { vertex: root, n });
        }
        let g = Self::assemble(n, edges, root)?;
        let dist = g.reach(root, false);
        if let Some(to) = dist.iter().position(|d| !d) {
            return Err(GraphError::NotStronglyConnected { from: root, to });
        }
        Ok(g)
    }

    fn assemble(n: usize, edges: &[(Vertex, Vertex)], root: Vertex) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        // (u, v) -> (port of v at u, index of u among v's predecessors)
        let mut slots: HashMap<(Vertex, Vertex), (Port, usize)> = HashMap::with_capacity(edges.len());
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if slots.insert((u, v), (succ[u].len(), pred[v].len())).is_some() {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            succ[u].push(v);
            pred[v].push(u);
        }
        let views = succ
            .iter()
            .enumerate()
            .map(|(u, out)| {
                out.iter()
                    .map(|&v| EdgeView {
                        pred_index: slots[&(u, v)].1,
                        back_port: slots.get(&(v, u)).map(|&(port, _)| port),
                    })
                    .collect()
            })
            .collect();
        let mut g = Self {
            succ,
            pred,
            views,
            edge_count: edges.len(),
            root,
            strongly_connected: false,
        };
        g.strongly_connected = g.first_unreachable_pair().is_none();
        Ok(g)
    }

    /// Forward BFS and reverse BFS from vertex 0.
    fn first_unreachable_pair(&self) -> Option<(Vertex, Vertex)> {
        if let Some(to) = self.reach(0, false).iter().position(|r| !r) {
            return Some((0, to));
        }
        self.reach(0, true).iter().position(|r| !r).map(|from| (from, 0))
    }

    fn reach(&self, source: Vertex, reverse: bool) -> Vec<bool> {
        let adj = if reverse { &self.pred } else { &self.succ };
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([source]);
        seen[source] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub fn n(&self) -> usize {
        self.succ.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.strongly_connected
    }

    /// Root passed to [`DiGraph::new_rooted`]; 0 for graphs built with [`DiGraph::new`].
    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn successors(&self, v: Vertex) -> &[Vertex] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: Vertex) -> &[Vertex] {
        &self.pred[v]
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.succ[v].len()
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.pred[v].len()
    }

    pub fn max_out_degree(&self) -> usize {
        self.succ.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_in_degree(&self) -> usize {
        self.pred.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Receiver-side view of the edge leaving `u` through `port`.
    pub fn edge_view(&self, u: Vertex, port: Port) -> EdgeView {
        self.views[u][port]
    }

    /// Edges in port order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, out)| out.iter().map(move |&v| (u, v)))
    }

    /// Reverses every edge. Reversal is an involution on the edge set; port
    /// order of the result follows the predecessor lists.
    pub fn transpose(&self) -> DiGraph {
        let edges: Vec<_> = self
            .pred
            .iter()
            .enumerate()
            .flat_map(|(v, ins)| ins.iter().map(move |&u| (v, u)))
            .collect();
        let mut g = Self::assemble(self.n(), &edges, self.root).expect("transpose of a valid graph");
        g.strongly_connected = self.strongly_connected;
        g
    }

    /// Renames vertex `v` to `perm[v]`, preserving each vertex's port order.
    pub fn relabel(&self, perm: &[Vertex]) -> Result<DiGraph, GraphError> {
        let n = self.n();
        let mut check = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut check[p], true) {
                return Err(GraphError::InvalidParams("relabeling is not a permutation".into()));
            }
        }
        if perm.len() != n {
            return Err(GraphError::InvalidParams("relabeling is not a permutation".into()));
        }
        let mut inverse = vec![0; n];
        for (v, &p) in perm.iter().enumerate() {
            inverse[p] = v;
        }
        let edges: Vec<_> = (0..n)
            .flat_map(|w| self.succ[inverse[w]].iter().map(move |&v| (w, perm[v])))
            .collect();
        let g = Self::assemble(n, &edges, perm[self.root])?;
        Ok(g)
    }

    /// BFS distances from `source`; `None` for unreachable vertices (only
    /// possible on rooted, non-strongly-connected graphs).
    pub fn shortest_distances(&self, source: Vertex) -> Vec<Option<usize>> {
        self.multi_source_distances(&[source])
    }

    fn multi_source_distances(&self, sources: &[Vertex]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices have a distance");
            for &v in &self.succ[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest finite distance from `source`.
    pub fn eccentricity(&self, source: Vertex) -> usize {
        self.shortest_distances(source).into_iter().flatten().max().unwrap_or(0)
    }

    /// D(G): maximum shortest-path length over ordered pairs.
    pub fn diameter(&self) -> usize {
        (0..self.n()).map(|s| self.eccentricity(s)).max().unwrap_or(0)
    }

    /// D_c(G) for a placement where rumor `i` starts at `holders[i]`: the
    /// largest distance from a rumor's initial holder to any vertex, maximized
    /// over rumors.
    pub fn bitstring_diameter(&self, holders: &[Vertex]) -> Result<usize, GraphError> {
        if holders.is_empty() {
            return Err(GraphError::EmptyHolders);
        }
        let mut distinct: Vec<_> = holders.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        Ok(distinct.into_iter().map(|h| self.eccentricity(h)).max().unwrap_or(0))
    }

    /// Largest distance from the nearest of `holders`: the bitstring diameter
    /// of a single rumor that starts at every vertex of `holders`.
    pub fn coverage_radius(&self, holders: &[Vertex]) -> Result<usize, GraphError> {
        if holders.is_empty() {
            return Err(GraphError::EmptyHolders);
        }
        Ok(self.multi_source_distances(holders).into_iter().flatten().max().unwrap_or(0))
    }

    /// Worst-case sure-covering round count for `fwr` on a rooted tree: the
    /// maximum over root-to-leaf paths of the summed tree out-degrees.
    ///
    /// Accepts pure trees and trees with child-to-parent edges added; only the
    /// parent-to-child direction is counted.
    pub fn tree_bound(&self, root: Vertex) -> Result<usize, GraphError> {
        let n = self.n();
        if root >= n {
            return Err(GraphError::VertexOutOfRange { vertex: root, n });
        }
        let dist = self.shortest_distances(root);
        if dist.iter().any(Option::is_none) {
            return Err(GraphError::NotATree(root));
        }
        let depth = |v: Vertex| dist[v].expect("all reachable");
        let mut children = vec![Vec::new(); n];
        let mut parent_count = vec![0usize; n];
        for (u, v) in self.edges() {
            if depth(v) == depth(u) + 1 {
                children[u].push(v);
                parent_count[v] += 1;
            }
        }
        if parent_count.iter().enumerate().any(|(v, &c)| c != usize::from(v != root)) {
            return Err(GraphError::NotATree(root));
        }
        for (u, v) in self.edges() {
            let forward = depth(v) == depth(u) + 1;
            let backward = depth(u) == depth(v) + 1 && children[v].contains(&u);
            if !forward && !backward {
                return Err(GraphError::NotATree(root));
            }
        }
        // Longest weighted path, processed deepest first.
        let mut order: Vec<Vertex> = (0..n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(depth(v)));
        let mut best = vec![0usize; n];
        for v in order {
            let below = children[v].iter().map(|&c| best[c]).max().unwrap_or(0);
            best[v] = children[v].len() + below;
        }
        Ok(best[root])
    }
}

/// Parses the plain-text graph format: first non-comment line `n`, then one
/// `u v` directed edge per line. `#` starts a comment.
pub fn parse_graph(text: &str) -> Result<DiGraph, GraphError> {
    let mut n = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| GraphError::Parse { line: idx + 1, msg: msg.to_string() };
        let fields: Vec<_> = line.split_whitespace().collect();
        match (n, fields.as_slice()) {
            (None, [count]) => n = Some(count.parse::<usize>().map_err(|_| err("bad vertex count"))?),
            (None, _) => return Err(err("expected vertex count")),
            (Some(_), [u, v]) => {
                let u = u.parse().map_err(|_| err("bad vertex id"))?;
                let v = v.parse().map_err(|_| err("bad vertex id"))?;
                edges.push((u, v));
            }
            (Some(_), _) => return Err(err("expected `u v`")),
        }
    }
    let n = n.ok_or(GraphError::Parse { line: 0, msg: "missing vertex count".into() })?;
    DiGraph::new(n, &edges)
}

/// Serializes a graph in the format read by [`parse_graph`].
pub fn write_graph(g: &DiGraph) -> String {
    let mut out = format!("{}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// A named member of one of the bounded-degree families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FamilySpec {
    /// Symmetric directed chain on `n` vertices.
    Chain { n: usize },
    /// Symmetric directed ring, `n >= 3`.
    Ring { n: usize },
    /// Rooted q-ary tree of the given depth. Child-to-parent edges are added
    /// unless `pure` is set.
    QaryTree { q: usize, depth: usize, pure: bool },
    /// Symmetric toroidal lattice, both sides `>= 3`.
    Torus { rows: usize, cols: usize },
    Complete { n: usize },
    /// Directed `d`-regular graph from `d` random permutations.
    RandomRegular { n: usize, d: usize, seed: u64 },
}

const REGULAR_ATTEMPTS: usize = 200;
const PERMUTATION_ATTEMPTS: usize = 1000;

impl FamilySpec {
    pub fn generate(&self) -> Result<DiGraph, GraphError> {
        let invalid = |msg: String| Err(GraphError::InvalidParams(msg));
        match *self {
            FamilySpec::Chain { n } => {
                if n == 0 {
                    return invalid("chain needs n >= 1".into());
                }
                let edges: Vec<_> = (0..n.saturating_sub(1)).flat_map(|i| [(i, i + 1), (i + 1, i)]).collect();
                DiGraph::new(n, &adjacency_order(n, &edges))
            }
            FamilySpec::Ring { n } => {
                if n < 3 {
                    return invalid(format!("ring needs n >= 3, got {n}"));
                }
                let edges: Vec<_> = (0..n).flat_map(|i| [(i, (i + 1) % n), ((i + 1) % n, i)]).collect();
                DiGraph::new(n, &adjacency_order(n, &edges))
            }
            FamilySpec::QaryTree { q, depth, pure } => {
                if q == 0 {
                    return invalid("tree arity must be >= 1".into());
                }
                let n = tree_size(q, depth).ok_or_else(|| GraphError::InvalidParams("tree too large".into()))?;
                let mut edges = Vec::with_capacity(2 * n);
                for child in 1..n {
                    let parent = (child - 1) / q;
                    edges.push((parent, child));
                    if !pure {
                        edges.push((child, parent));
                    }
                }
                let edges = adjacency_order(n, &edges);
                if pure {
                    DiGraph::new_rooted(n, &edges, 0)
                } else {
                    DiGraph::new(n, &edges)
                }
            }
            FamilySpec::Torus { rows, cols } => {
                if rows < 3 || cols < 3 {
                    return invalid(format!("torus sides must be >= 3, got {rows}x{cols}"));
                }
                let id = |r: usize, c: usize| r * cols + c;
                let mut edges = Vec::with_capacity(4 * rows * cols);
                for r in 0..rows {
                    for c in 0..cols {
                        let v = id(r, c);
                        edges.push((v, id((r + rows - 1) % rows, c)));
                        edges.push((v, id(r, (c + cols - 1) % cols)));
                        edges.push((v, id(r, (c + 1) % cols)));
                        edges.push((v, id((r + 1) % rows, c)));
                    }
                }
                DiGraph::new(rows * cols, &adjacency_order(rows * cols, &edges))
            }
            FamilySpec::Complete { n } => {
                if n == 0 {
                    return invalid("complete graph needs n >= 1".into());
                }
                let edges: Vec<_> = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect();
                DiGraph::new(n, &edges)
            }
            FamilySpec::RandomRegular { n, d, seed } => random_regular(n, d, seed),
        }
    }

    /// Same family at a different vertex count. Trees and tori only accept
    /// sizes they can realize exactly.
    pub fn with_size(&self, n: usize) -> Result<FamilySpec, GraphError> {
        Ok(match *self {
            FamilySpec::Chain { .. } => FamilySpec::Chain { n },
            FamilySpec::Ring { .. } => FamilySpec::Ring { n },
            FamilySpec::Complete { .. } => FamilySpec::Complete { n },
            FamilySpec::RandomRegular { d, seed, .. } => FamilySpec::RandomRegular { n, d, seed },
            FamilySpec::Torus { .. } => {
                let side = (n as f64).sqrt().round() as usize;
                if side * side != n {
                    return Err(GraphError::InvalidParams(format!("torus size {n} is not a square")));
                }
                FamilySpec::Torus { rows: side, cols: side }
            }
            FamilySpec::QaryTree { q, pure, .. } => {
                let depth = (0..64)
                    .find(|&k| tree_size(q, k) == Some(n))
                    .ok_or_else(|| GraphError::InvalidParams(format!("no {q}-ary tree has {n} vertices")))?;
                FamilySpec::QaryTree { q, depth, pure }
            }
        })
    }

    /// Family degree bounds (𝖽, 𝖽̂) as parameters of the generator.
    pub fn degree_bounds(&self) -> (usize, usize) {
        match *self {
            FamilySpec::Chain { .. } | FamilySpec::Ring { .. } => (2, 2),
            FamilySpec::QaryTree { q, pure: true, .. } => (q, 1),
            FamilySpec::QaryTree { q, pure: false, .. } => (q + 1, 1),
            FamilySpec::Torus { .. } => (4, 4),
            FamilySpec::Complete { n } => (n.saturating_sub(1), n.saturating_sub(1)),
            FamilySpec::RandomRegular { d, .. } => (d, d),
        }
    }
}

fn tree_size(q: usize, depth: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut level: usize = 1;
    for _ in 0..=depth {
        total = total.checked_add(level)?;
        level = level.checked_mul(q)?;
    }
    Some(total)
}

/// Stable sort by tail vertex, so ports follow the order edges were listed.
fn adjacency_order(n: usize, edges: &[(Vertex, Vertex)]) -> Vec<(Vertex, Vertex)> {
    let mut buckets = vec![Vec::new(); n];
    for &(u, v) in edges {
        buckets[u].push(v);
    }
    buckets
        .into_iter()
        .enumerate()
        .flat_map(|(u, mut vs)| {
            vs.sort_unstable();
            vs.into_iter().map(move |v| (u, v))
        })
        .collect()
}

fn random_regular(n: usize, d: usize, seed: u64) -> Result<DiGraph, GraphError> {
    if d == 0 || d >= n {
        return Err(GraphError::InvalidParams(format!("random regular needs 1 <= d < n, got d={d}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..REGULAR_ATTEMPTS {
        let mut chosen: HashSet<(Vertex, Vertex)> = HashSet::with_capacity(n * d);
        let mut edges = Vec::with_capacity(n * d);
        for _ in 0..d {
            let mut perm: Vec<Vertex> = (0..n).collect();
            let mut accepted = false;
            for _ in 0..PERMUTATION_ATTEMPTS {
                perm.shuffle(&mut rng);
                if perm.iter().enumerate().all(|(u, &v)| u != v && !chosen.contains(&(u, v))) {
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                continue 'attempt;
            }
            for (u, &v) in perm.iter().enumerate() {
                chosen.insert((u, v));
                edges.push((u, v));
            }
        }
        match DiGraph::new(n, &adjacency_order(n, &edges)) {
            Ok(g) => return Ok(g),
            Err(GraphError::NotStronglyConnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::InvalidParams(format!(
        "no strongly connected {d}-regular digraph on {n} vertices after {REGULAR_ATTEMPTS} attempts"
    )))
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilySpec::Chain { n } => write!(f, "chain:{n}"),
            FamilySpec::Ring { n } => write!(f, "ring:{n}"),
            FamilySpec::QaryTree { q, depth, pure: false } => write!(f, "tree:{q}:{depth}"),
            FamilySpec::QaryTree { q, depth, pure: true } => write!(f, "tree:{q}:{depth}:pure"),
            FamilySpec::Torus { rows, cols } => write!(f, "torus:{rows}x{cols}"),
            FamilySpec::Complete { n } => write!(f, "complete:{n}"),
            FamilySpec::RandomRegular { n, d, seed } => write!(f, "regular:{n}:{d}:{seed}"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = GraphError;

    /// `chain:N`, `ring:N`, `tree:Q:DEPTH[:pure]`, `torus:RxC`, `complete:N`,
    /// `regular:N:D[:SEED]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::InvalidParams(format!("unrecognized graph spec `{s}`"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let parts: Vec<_> = s.trim().split(':').collect();
        Ok(match parts.as_slice() {
            ["chain", n] => FamilySpec::Chain { n: num(n)? },
            ["ring", n] => FamilySpec::Ring { n: num(n)? },
            ["complete", n] => FamilySpec::Complete { n: num(n)? },
            ["tree", q, depth] => FamilySpec::QaryTree { q: num(q)?, depth: num(depth)?, pure: false },
            ["tree", q, depth, "pure"] => FamilySpec::QaryTree { q: num(q)?, depth: num(depth)?, pure: true },
            ["torus", dims] => {
                let (r, c) = dims.split_once('x').ok_or_else(bad)?;
                FamilySpec::Torus { rows: num(r)?, cols: num(c)? }
            }
            ["regular", n, d] => FamilySpec::RandomRegular { n: num(n)?, d: num(d)?, seed: 0 },
            ["regular", n, d, seed] => FamilySpec::RandomRegular {
                n: num(n)?,
                d: num(d)?,
                seed: seed.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        })
    }
}

impl TryFrom<String> for FamilySpec {
    type Error = GraphError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FamilySpec> for String {
    fn from(spec: FamilySpec) -> String {
        spec.to_string()
    }
}

//! Graph construction and ingestion.
//!
//! Every scheme in this crate runs on a [`Graph`]: a weighted, undirected,
//! connected graph with dense 0-based node ids and two edge metrics. The hop
//! metric prices every edge at 1; the RTT metric uses the per-edge
//! `rtt_weight`, which models physical distance or round-trip time.

mod generators;

pub use generators::{
    generate_geometric, generate_ocean, generate_scale_free, generate_two_level, geometric_radius,
    TwoLevelGraph,
};

use std::collections::HashSet;
use std::fmt;

/// Dense 0-based node identifier.
pub type NodeId = usize;

/// Which edge cost a computation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Every edge costs 1.
    Hop,
    /// Every edge costs its `rtt_weight`.
    Rtt,
}

impl Metric {
    pub fn edge_cost(self, rtt_weight: f64) -> f64 {
        match self {
            Metric::Hop => 1.0,
            Metric::Rtt => rtt_weight,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Hop => "hop",
            Metric::Rtt => "rtt",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TopologyError {
    /// Line has the wrong token count or an unparseable token.
    MalformedLine { line: usize },
    /// Edge weight is zero, negative, or not finite.
    NonPositiveWeight { u: usize, v: usize },
    SelfLoop { node: usize },
    DuplicateEdge { u: usize, v: usize },
    /// Edge list contains no edges at all.
    EmptyInput,
    DisconnectedGraph,
    NodeOutOfRange { node: usize, node_count: usize },
    InvalidParameters(String),
    /// Random placement never produced a connected graph.
    CouldNotConnect { attempts: usize },
}

impl fmt::Display for TopologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyError::MalformedLine { line } => {
                write!(f, "malformed edge-list line {line}: expected \"u v rtt_weight\"")
            }
            TopologyError::NonPositiveWeight { u, v } => {
                write!(f, "edge ({u}, {v}) has a non-positive weight")
            }
            TopologyError::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            TopologyError::DuplicateEdge { u, v } => write!(f, "duplicate edge ({u}, {v})"),
            TopologyError::EmptyInput => write!(f, "edge list contains no edges"),
            TopologyError::DisconnectedGraph => write!(f, "graph is not connected"),
            TopologyError::NodeOutOfRange { node, node_count } => {
                write!(f, "node {node} out of range for node count {node_count}")
            }
            TopologyError::InvalidParameters(msg) => write!(f, "invalid parameters: {msg}"),
            TopologyError::CouldNotConnect { attempts } => {
                write!(f, "no connected placement found in {attempts} attempts")
            }
        }
    }
}

impl std::error::Error for TopologyError {}

/// Weighted undirected connected graph with dense node ids.
///
/// Immutable once built; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    /// Canonical edge list: u < v, sorted by (u, v).
    edges: Vec<(NodeId, NodeId, f64)>,
    /// Per-node neighbor list sorted by neighbor id.
    adjacency: Vec<Vec<(NodeId, f64)>>,
}

impl Graph {
    /// Builds a graph from an explicit edge list, enforcing every invariant:
    /// ids in range, no self-loops, no duplicates (in either orientation),
    /// positive finite weights, and connectivity.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Result<Graph, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::InvalidParameters(
                "node count must be positive".into(),
            ));
        }
        let mut canonical: Vec<(NodeId, NodeId, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u >= node_count {
                return Err(TopologyError::NodeOutOfRange { node: u, node_count });
            }
            if v >= node_count {
                return Err(TopologyError::NodeOutOfRange { node: v, node_count });
            }
            if u == v {
                return Err(TopologyError::SelfLoop { node: u });
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(TopologyError::NonPositiveWeight { u, v });
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            canonical.push((a, b, w));
        }
        canonical.sort_by_key(|&(a, b, _)| (a, b));
        for pair in canonical.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(TopologyError::DuplicateEdge { u: pair[0].0, v: pair[0].1 });
            }
        }

        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v, w) in &canonical {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }

        let graph = Graph { node_count, edges: canonical, adjacency };
        if !graph.is_connected() {
            return Err(TopologyError::DisconnectedGraph);
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list: u < v, sorted by (u, v).
    pub fn edges(&self) -> &[(NodeId, NodeId, f64)] {
        &self.edges
    }

    /// Neighbors of `node` with their rtt weights, sorted by neighbor id.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Rtt weight of edge (u, v) if present.
    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |&(n, _)| n).ok().map(|i| list[i].1)
    }

    fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return false;
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == self.node_count
    }
}

/// Parses the line-oriented edge-list format: one `u v rtt_weight` per line,
/// `#` lines and blank lines ignored. Arbitrary ids are remapped onto the
/// dense range 0..n-1 in ascending numeric order.
pub fn load_edge_list(text: &str) -> Result<Graph, TopologyError> {
    let mut raw: Vec<(u64, u64, f64, usize)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (u, v, w) = match (tokens.next(), tokens.next(), tokens.next(), tokens.next()) {
            (Some(u), Some(v), Some(w), None) => (u, v, w),
            _ => return Err(TopologyError::MalformedLine { line: line_no }),
        };
        let u: u64 = u.parse().map_err(|_| TopologyError::MalformedLine { line: line_no })?;
        let v: u64 = v.parse().map_err(|_| TopologyError::MalformedLine { line: line_no })?;
        let w: f64 = w.parse().map_err(|_| TopologyError::MalformedLine { line: line_no })?;
        if !w.is_finite() {
            return Err(TopologyError::MalformedLine { line: line_no });
        }
        raw.push((u, v, w, line_no));
    }
    if raw.is_empty() {
        return Err(TopologyError::EmptyInput);
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v, _, _)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let dense = |id: u64| ids.binary_search(&id).expect("id collected above");

    let mut edges = Vec::with_capacity(raw.len());
    let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(raw.len());
    for &(u, v, w, _line) in &raw {
        if u == v {
            return Err(TopologyError::SelfLoop { node: u as usize });
        }
        let (a, b) = (dense(u), dense(v));
        let key = if a < b { (a, b) } else { (b, a) };
        if !seen.insert(key) {
            return Err(TopologyError::DuplicateEdge { u: u.min(v) as usize, v: u.max(v) as usize });
        }
        if w <= 0.0 {
            return Err(TopologyError::NonPositiveWeight { u: u as usize, v: v as usize });
        }
        edges.push((key.0, key.1, w));
    }
    Graph::from_edges(ids.len(), edges)
}

/// Serializes a graph in the edge-list format accepted by [`load_edge_list`].
/// Round-trips bit-exactly: weights print in shortest form that reparses to
/// the identical f64.
pub fn emit_edge_list(graph: &Graph) -> String {
    let mut out = String::new();
    for &(u, v, w) in graph.edges() {
        out.push_str(&format!("{u} {v} {w}\n"));
    }
    out
}

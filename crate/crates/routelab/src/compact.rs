//! One-level landmark/vicinity compact routing.
//!
//! A set of landmarks (default size ceil(sqrt(N))) splits the network into
//! shortest-path vicinities. Every node stores a next hop toward each
//! landmark plus direct next hops for the destinations in its vicinity;
//! everything else is forwarded toward the destination's landmark, whose
//! subtree holds direct entries the rest of the way. Tables are O(sqrt(N))
//! in expectation and the worst-case stretch is 3: a detour via the
//! destination's landmark costs at most d(s,t) + 2 * d(t, L), and d(t, L)
//! exceeding d(s,t) would have put t inside s's vicinity.

use crate::metrics::TableSizeSummary;
use crate::route::{RouteError, RoutePath, RoutingScheme};
use crate::shortest_path::{
    multi_source_partition, search, sssp, DistanceMap, SearchOptions,
};
use crate::stacked::predicted_table_total;
use crate::topology::{Graph, Metric, NodeId};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandmarkStrategy {
    /// `count` distinct nodes sampled uniformly by seed.
    Uniform,
    /// The `count` highest-degree nodes, ties toward the smaller id.
    HighDegree,
}

impl LandmarkStrategy {
    pub fn name(self) -> &'static str {
        match self {
            LandmarkStrategy::Uniform => "uniform",
            LandmarkStrategy::HighDegree => "high_degree",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompactError {
    CountOutOfRange { count: usize, node_count: usize },
    InvalidLandmark { node: NodeId, node_count: usize },
}

impl fmt::Display for CompactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompactError::CountOutOfRange { count, node_count } => {
                write!(f, "landmark count {count} not in 1..={node_count}")
            }
            CompactError::InvalidLandmark { node, node_count } => {
                write!(f, "landmark {node} out of range for node count {node_count}")
            }
        }
    }
}

impl std::error::Error for CompactError {}

/// Landmark set plus the vicinity geometry it induces: every node's nearest
/// landmark and the distance to it (the node's vicinity radius).
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    members: Vec<NodeId>,
    nearest: Vec<NodeId>,
    distance: Vec<f64>,
    origin: &'static str,
}

impl LandmarkSet {
    /// Builds the set from explicit members (deduplicated, sorted).
    pub fn from_members(
        graph: &Graph,
        members: impl IntoIterator<Item = NodeId>,
        metric: Metric,
    ) -> Result<LandmarkSet, CompactError> {
        Self::assemble(graph, members.into_iter().collect(), metric, "explicit")
    }

    fn assemble(
        graph: &Graph,
        mut members: Vec<NodeId>,
        metric: Metric,
        origin: &'static str,
    ) -> Result<LandmarkSet, CompactError> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(CompactError::CountOutOfRange {
                count: 0,
                node_count: graph.node_count(),
            });
        }
        for &m in &members {
            if m >= graph.node_count() {
                return Err(CompactError::InvalidLandmark {
                    node: m,
                    node_count: graph.node_count(),
                });
            }
        }
        let partition = multi_source_partition(graph, &members, metric)
            .expect("members validated nonempty and in range");
        Ok(LandmarkSet {
            members,
            nearest: partition.nearest,
            distance: partition.distance,
            origin,
        })
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn nearest_landmark(&self, node: NodeId) -> NodeId {
        self.nearest[node]
    }

    pub fn landmark_distance(&self, node: NodeId) -> f64 {
        self.distance[node]
    }

    /// Vicinity cell sizes keyed by landmark.
    pub fn cell_sizes(&self) -> BTreeMap<NodeId, usize> {
        let mut sizes: BTreeMap<NodeId, usize> = BTreeMap::new();
        for &src in &self.nearest {
            *sizes.entry(src).or_default() += 1;
        }
        sizes
    }
}

/// Default landmark count ceil(sqrt(N)).
pub fn default_landmark_count(node_count: usize) -> usize {
    (node_count as f64).sqrt().ceil() as usize
}

pub fn select_landmarks(
    graph: &Graph,
    count: usize,
    strategy: LandmarkStrategy,
    seed: u64,
    metric: Metric,
) -> Result<LandmarkSet, CompactError> {
    let n = graph.node_count();
    if count == 0 || count > n {
        return Err(CompactError::CountOutOfRange { count, node_count: n });
    }
    let members: Vec<NodeId> = match strategy {
        LandmarkStrategy::Uniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::index::sample(&mut rng, n, count).into_vec()
        }
        LandmarkStrategy::HighDegree => {
            let mut by_degree: Vec<NodeId> = (0..n).collect();
            by_degree.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
            by_degree.truncate(count);
            by_degree
        }
    };
    LandmarkSet::assemble(graph, members, metric, strategy.name())
}

/// Logarithmic routing label: the destination id and its landmark id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompactLabel {
    pub node: NodeId,
    pub landmark: NodeId,
}

impl CompactLabel {
    /// Bits needed to encode the label: two ids of ceil(log2 N) bits each.
    pub fn bit_length(&self, node_count: usize) -> u32 {
        2 * bits_for_ids(node_count)
    }
}

/// Bits needed to distinguish `count` dense ids.
pub(crate) fn bits_for_ids(count: usize) -> u32 {
    if count <= 1 {
        0
    } else {
        usize::BITS - (count - 1).leading_zeros()
    }
}

/// Per-node forwarding state.
///
/// `landmark_entries` covers exactly the landmark set; a landmark's own row
/// maps to itself and is never dereferenced while forwarding (a packet at
/// the destination's landmark always has a direct vicinity entry).
/// `vicinity_entries` holds the strict-vicinity destinations
/// { t : d(owner,t) < d(t, L) } plus, for each destination in the owner's
/// landmark subtree, the tree child leading to it; both kinds of next hop
/// lie on an exact shortest path to the key.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    pub owner: NodeId,
    pub landmark_entries: BTreeMap<NodeId, NodeId>,
    pub vicinity_entries: BTreeMap<NodeId, NodeId>,
}

impl RoutingTable {
    pub fn len(&self) -> usize {
        self.landmark_entries.len() + self.vicinity_entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Built one-level compact routing scheme. Immutable; routing calls are
/// independent and safe to run concurrently.
pub struct CompactScheme {
    graph: Arc<Graph>,
    metric: Metric,
    landmarks: LandmarkSet,
    tables: Vec<RoutingTable>,
    labels: Vec<CompactLabel>,
}

impl CompactScheme {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn landmarks(&self) -> &LandmarkSet {
        &self.landmarks
    }

    pub fn tables(&self) -> &[RoutingTable] {
        &self.tables
    }

    pub fn label(&self, node: NodeId) -> CompactLabel {
        self.labels[node]
    }
}

pub fn build_compact(graph: Arc<Graph>, landmarks: LandmarkSet, metric: Metric) -> CompactScheme {
    let n = graph.node_count();
    let mut tables: Vec<RoutingTable> = (0..n)
        .map(|owner| RoutingTable {
            owner,
            landmark_entries: BTreeMap::new(),
            vicinity_entries: BTreeMap::new(),
        })
        .collect();

    // Landmark rows: next hop toward every landmark along its shortest-path
    // tree. Kept around for the subtree (chain) pass below.
    let trees: Vec<DistanceMap> = landmarks
        .members()
        .iter()
        .map(|&l| sssp(&graph, l, metric).expect("landmarks validated"))
        .collect();
    for (tree, &l) in trees.iter().zip(landmarks.members()) {
        for (v, table) in tables.iter_mut().enumerate() {
            let hop = tree.parent[v].unwrap_or(l);
            table.landmark_entries.insert(l, hop);
        }
    }

    // Strict vicinities: t belongs to every table whose owner is closer to t
    // than t is to its own landmark. Truncated search from t settles exactly
    // those owners; parents point back toward t.
    for t in 0..n {
        let radius = landmarks.landmark_distance(t);
        if radius <= 0.0 {
            continue;
        }
        let ball = search(
            &graph,
            &[t],
            metric,
            SearchOptions { radius_strict: Some(radius), ..Default::default() },
        );
        for &v in &ball.settled {
            if v != t {
                tables[v].vicinity_entries.insert(t, ball.parent[v].expect("settled after source"));
            }
        }
    }

    // Landmark-tree chains: every ancestor of t in t's own landmark tree
    // stores the tree child leading to t, so a packet arriving at the
    // landmark can always descend. Strict-vicinity entries take precedence;
    // both point along exact shortest paths.
    let member_index: BTreeMap<NodeId, usize> =
        landmarks.members().iter().enumerate().map(|(i, &l)| (l, i)).collect();
    for t in 0..n {
        let tree = &trees[member_index[&landmarks.nearest_landmark(t)]];
        let mut child = t;
        let mut at = tree.parent[t];
        while let Some(v) = at {
            tables[v].vicinity_entries.entry(t).or_insert(child);
            child = v;
            at = tree.parent[v];
        }
    }

    let labels = (0..n)
        .map(|v| CompactLabel { node: v, landmark: landmarks.nearest_landmark(v) })
        .collect();
    CompactScheme { graph, metric, landmarks, tables, labels }
}

/// Simulates hop-by-hop forwarding from `source` to the labelled
/// destination: direct vicinity entries when present, otherwise toward the
/// destination's landmark. Any missing entry or revisited node surfaces as
/// ForwardingStuck, a table-construction bug that is never rerouted.
pub fn route_compact(
    scheme: &CompactScheme,
    source: NodeId,
    dest_label: &CompactLabel,
) -> Result<RoutePath, RouteError> {
    let n = scheme.graph.node_count();
    if source >= n {
        return Err(RouteError::InvalidNode { node: source, node_count: n });
    }
    let dest = dest_label.node;
    if dest >= n || scheme.labels[dest] != *dest_label {
        return Err(RouteError::LabelMismatch { node: dest });
    }

    let mut nodes = vec![source];
    let mut visited: HashSet<NodeId> = HashSet::new();
    visited.insert(source);
    let mut at = source;
    while at != dest {
        let table = &scheme.tables[at];
        let next = match table.vicinity_entries.get(&dest) {
            Some(&hop) => hop,
            None => match table.landmark_entries.get(&dest_label.landmark) {
                // A landmark's self row never forwards; hitting it means the
                // chain entries are broken.
                Some(&hop) if hop != at => hop,
                _ => return Err(RouteError::ForwardingStuck { at, dest }),
            },
        };
        if !visited.insert(next) {
            return Err(RouteError::ForwardingStuck { at: next, dest });
        }
        nodes.push(next);
        at = next;
    }
    Ok(RoutePath::from_nodes(&scheme.graph, nodes))
}

/// Per-node total table sizes (landmark rows plus vicinity rows).
pub fn table_sizes(scheme: &CompactScheme) -> TableSizeSummary {
    TableSizeSummary::from_sizes(scheme.tables.iter().map(RoutingTable::len).collect())
}

/// Diagnostic dump: one "node | landmark | table_size" line per node.
pub fn dump_scheme(scheme: &CompactScheme) -> String {
    let mut out = String::new();
    for table in &scheme.tables {
        let label = scheme.labels[table.owner];
        out.push_str(&format!("{} | {} | {}\n", table.owner, label.landmark, table.len()));
    }
    out
}

impl RoutingScheme for CompactScheme {
    fn scheme_name(&self) -> String {
        format!("compact(l={},{})", self.landmarks.members().len(), self.landmarks.origin)
    }

    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn build_metric(&self) -> Metric {
        self.metric
    }

    fn route(&self, source: NodeId, dest: NodeId) -> Result<RoutePath, RouteError> {
        let n = self.graph.node_count();
        if dest >= n {
            return Err(RouteError::InvalidNode { node: dest, node_count: n });
        }
        route_compact(self, source, &self.labels[dest])
    }

    fn table_sizes(&self) -> Vec<usize> {
        self.tables.iter().map(RoutingTable::len).collect()
    }

    fn predicted_table_entries(&self) -> u64 {
        // The one-level formula 2 * sqrt(N), the i = 1 point of the stacked
        // size law; reported against the default ceil(sqrt(N)) sizing.
        predicted_table_total(self.graph.node_count() as u64, 1)
    }

    fn stretch_bound(&self) -> f64 {
        3.0
    }
}

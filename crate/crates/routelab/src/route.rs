//! Route representation and the common interface every scheme implements.

use crate::shortest_path::{sssp, DistanceMap};
use crate::topology::{Graph, Metric, NodeId};

use std::fmt;
use std::sync::Arc;

/// A concrete node sequence produced by simulated hop-by-hop forwarding,
/// priced under both metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutePath {
    pub nodes: Vec<NodeId>,
    pub cost_hop: u64,
    pub cost_rtt: f64,
}

impl RoutePath {
    /// Prices a forwarding trace. Consecutive nodes must be adjacent; route
    /// simulators only emit real hops, so a violation is an internal bug.
    pub(crate) fn from_nodes(graph: &Graph, nodes: Vec<NodeId>) -> RoutePath {
        let cost_rtt = nodes
            .windows(2)
            .map(|e| {
                graph
                    .edge_weight(e[0], e[1])
                    .expect("forwarding trace uses a non-edge")
            })
            .sum();
        RoutePath { cost_hop: (nodes.len() - 1) as u64, cost_rtt, nodes }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dest(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    /// Path cost under the chosen metric.
    pub fn cost(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Hop => self.cost_hop as f64,
            Metric::Rtt => self.cost_rtt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RouteError {
    /// No usable table entry, or a forwarding loop was detected. Either way
    /// the scheme's tables are wrong; this is never silently rerouted.
    ForwardingStuck { at: NodeId, dest: NodeId },
    /// Destination label was not produced by this scheme.
    LabelMismatch { node: NodeId },
    InvalidNode { node: NodeId, node_count: usize },
}

impl fmt::Display for RouteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RouteError::ForwardingStuck { at, dest } => {
                write!(f, "forwarding stuck at node {at} en route to {dest}")
            }
            RouteError::LabelMismatch { node } => {
                write!(f, "label for node {node} does not belong to this scheme")
            }
            RouteError::InvalidNode { node, node_count } => {
                write!(f, "node {node} out of range for node count {node_count}")
            }
        }
    }
}

impl std::error::Error for RouteError {}

/// Common interface over exact, compact, stacked, and hierarchical schemes:
/// route a pair, report per-node table sizes, and state the scheme's
/// predicted size and stretch bound. Built schemes are immutable, so routing
/// calls may run concurrently.
pub trait RoutingScheme: Send + Sync {
    /// Short stable name used in reports, e.g. "compact(l=16,uniform)".
    fn scheme_name(&self) -> String;

    fn graph(&self) -> &Graph;

    /// Metric the tables were built under (routes are scored under any).
    fn build_metric(&self) -> Metric;

    fn route(&self, source: NodeId, dest: NodeId) -> Result<RoutePath, RouteError>;

    /// Total table entries per node.
    fn table_sizes(&self) -> Vec<usize>;

    /// Formula prediction for the per-node table total.
    fn predicted_table_entries(&self) -> u64;

    /// Stretch bound the scheme family claims under its build metric.
    fn stretch_bound(&self) -> f64;
}

/// Full-table shortest-path routing: one entry per destination at every
/// node. The baseline all schemes are measured against.
pub struct ExactScheme {
    graph: Arc<Graph>,
    metric: Metric,
    maps: Vec<DistanceMap>,
}

impl ExactScheme {
    pub fn build(graph: Arc<Graph>, metric: Metric) -> ExactScheme {
        let maps = (0..graph.node_count())
            .map(|s| sssp(&graph, s, metric).expect("source ids are dense"))
            .collect();
        ExactScheme { graph, metric, maps }
    }
}

impl RoutingScheme for ExactScheme {
    fn scheme_name(&self) -> String {
        "exact".into()
    }

    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn build_metric(&self) -> Metric {
        self.metric
    }

    fn route(&self, source: NodeId, dest: NodeId) -> Result<RoutePath, RouteError> {
        let n = self.graph.node_count();
        for node in [source, dest] {
            if node >= n {
                return Err(RouteError::InvalidNode { node, node_count: n });
            }
        }
        Ok(RoutePath::from_nodes(&self.graph, self.maps[source].path_to(dest)))
    }

    fn table_sizes(&self) -> Vec<usize> {
        vec![self.graph.node_count(); self.graph.node_count()]
    }

    fn predicted_table_entries(&self) -> u64 {
        self.graph.node_count() as u64
    }

    fn stretch_bound(&self) -> f64 {
        1.0
    }
}

//! Exact shortest-path engine: single-source Dijkstra, multi-source Voronoi
//! partition, and an all-pairs distance oracle.
//!
//! Everything here is deterministic regardless of evaluation order. Ties on
//! exact distance are broken toward the smaller source id and then the
//! smaller parent id, so repeated runs (and parallel callers) always see the
//! same trees and the same cells.

use crate::topology::{Graph, Metric, NodeId};

use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeMap, BTreeSet};
use std::fmt;

/// Default node-count cap for [`all_pairs`]; an n-squared matrix above this
/// size is an accident, not an experiment.
pub const DEFAULT_ALL_PAIRS_CAP: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub enum PathError {
    InvalidNode { node: NodeId, node_count: usize },
    EmptySourceSet,
    GraphTooLarge { node_count: usize, cap: usize },
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathError::InvalidNode { node, node_count } => {
                write!(f, "node {node} out of range for node count {node_count}")
            }
            PathError::EmptySourceSet => write!(f, "source set is empty"),
            PathError::GraphTooLarge { node_count, cap } => {
                write!(f, "node count {node_count} exceeds the all-pairs cap {cap}")
            }
        }
    }
}

impl std::error::Error for PathError {}

/// Shortest-path tree from a single source.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    pub source: NodeId,
    /// Exact distance from the source to each node.
    pub distance: Vec<f64>,
    /// Predecessor on a shortest path from the source; None at the source.
    pub parent: Vec<Option<NodeId>>,
}

impl DistanceMap {
    /// Reconstructs the shortest path source -> node by walking parents.
    pub fn path_to(&self, node: NodeId) -> Vec<NodeId> {
        let mut path = vec![node];
        let mut at = node;
        while let Some(p) = self.parent[at] {
            path.push(p);
            at = p;
        }
        path.reverse();
        path
    }
}

/// Shortest-path Voronoi partition around a source set: each node is
/// assigned its nearest source, ties toward the smaller source id. Every
/// node's parent lies in the same cell, so each cell is connected.
#[derive(Debug, Clone)]
pub struct Partition {
    pub sources: Vec<NodeId>,
    /// Nearest source of each node (a source maps to itself).
    pub nearest: Vec<NodeId>,
    /// Distance to the nearest source.
    pub distance: Vec<f64>,
    /// Predecessor toward the nearest source; None at sources.
    pub parent: Vec<Option<NodeId>>,
}

impl Partition {
    /// Cell membership grouped by source, each member list sorted.
    pub fn cells(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut cells: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (node, &src) in self.nearest.iter().enumerate() {
            if src != UNREACHED {
                cells.entry(src).or_default().push(node);
            }
        }
        cells
    }
}

/// Sentinel for nodes outside a masked or truncated search.
pub(crate) const UNREACHED: NodeId = usize::MAX;

/// Raw output of the search engine. Nodes never settled keep distance
/// infinity, nearest UNREACHED, parent None.
#[derive(Debug, Clone)]
pub(crate) struct SearchResult {
    pub distance: Vec<f64>,
    pub nearest: Vec<NodeId>,
    pub parent: Vec<Option<NodeId>>,
    /// Nodes in settle order.
    pub settled: Vec<NodeId>,
}

#[derive(Clone, Copy, Default)]
pub(crate) struct SearchOptions<'a> {
    /// Traverse only nodes with mask[v] = true; sources must be masked in.
    pub mask: Option<&'a [bool]>,
    /// Settle only nodes strictly closer than this radius.
    pub radius_strict: Option<f64>,
    /// Stop as soon as every masked-in node of this set is settled.
    pub stop_after: Option<&'a [bool]>,
}

/// Total order on finite f64 keys.
#[derive(PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Deterministic multi-source Dijkstra. Nodes are labelled with the
/// lexicographic minimum of (distance, source id); on exact label ties the
/// smallest relaxing neighbor wins the parent slot. The result is therefore
/// a function of the graph alone, not of heap evaluation order.
pub(crate) fn search(
    graph: &Graph,
    sources: &[NodeId],
    metric: Metric,
    options: SearchOptions<'_>,
) -> SearchResult {
    let n = graph.node_count();
    let mut distance = vec![f64::INFINITY; n];
    let mut nearest = vec![UNREACHED; n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut settled = Vec::new();

    let masked_out = |v: NodeId| options.mask.is_some_and(|m| !m[v]);
    let mut stop_remaining = options.stop_after.map(|set| {
        set.iter()
            .enumerate()
            .filter(|&(v, &wanted)| wanted && !masked_out(v))
            .count()
    });

    let mut heap: BinaryHeap<Reverse<(OrdF64, NodeId, NodeId)>> = BinaryHeap::new();
    for &s in sources {
        debug_assert!(!masked_out(s), "sources must lie inside the mask");
        // Duplicate sources collapse onto the same zero label.
        if distance[s] == 0.0 && nearest[s] == s {
            continue;
        }
        distance[s] = 0.0;
        nearest[s] = s;
        heap.push(Reverse((OrdF64(0.0), s, s)));
    }

    while let Some(Reverse((OrdF64(d), src, u))) = heap.pop() {
        if done[u] || d > distance[u] || src != nearest[u] {
            continue;
        }
        if let Some(r) = options.radius_strict {
            if d >= r {
                break;
            }
        }
        done[u] = true;
        settled.push(u);
        if let Some(remaining) = &mut stop_remaining {
            if options.stop_after.unwrap()[u] {
                *remaining -= 1;
                if *remaining == 0 {
                    break;
                }
            }
        }
        for &(v, w) in graph.neighbors(u) {
            if done[v] || masked_out(v) {
                continue;
            }
            let cand = d + metric.edge_cost(w);
            if cand < distance[v] || (cand == distance[v] && src < nearest[v]) {
                distance[v] = cand;
                nearest[v] = src;
                parent[v] = Some(u);
                heap.push(Reverse((OrdF64(cand), src, v)));
            } else if cand == distance[v] && src == nearest[v] {
                // Equal label: keep the smallest parent id. No push needed,
                // the key is already queued.
                if parent[v].is_none_or(|p| u < p) {
                    parent[v] = Some(u);
                }
            }
        }
    }

    SearchResult { distance, nearest, parent, settled }
}

fn check_node(graph: &Graph, node: NodeId) -> Result<(), PathError> {
    if node >= graph.node_count() {
        return Err(PathError::InvalidNode { node, node_count: graph.node_count() });
    }
    Ok(())
}

/// Exact single-source shortest paths under the metric. Ties on exact
/// distance prefer the smaller parent id.
pub fn sssp(graph: &Graph, source: NodeId, metric: Metric) -> Result<DistanceMap, PathError> {
    check_node(graph, source)?;
    let result = search(graph, &[source], metric, SearchOptions::default());
    Ok(DistanceMap { source, distance: result.distance, parent: result.parent })
}

/// Shortest-path Voronoi partition of the whole graph around `sources`.
/// Nearest-source ties go to the smaller source id, then the smaller parent
/// id, so cells are deterministic and each cell is connected.
pub fn multi_source_partition(
    graph: &Graph,
    sources: &[NodeId],
    metric: Metric,
) -> Result<Partition, PathError> {
    multi_source_partition_within(graph, sources, None, metric)
}

/// Partition restricted to the subgraph induced by `mask` (None = whole
/// graph). Distances are measured inside the mask only.
pub(crate) fn multi_source_partition_within(
    graph: &Graph,
    sources: &[NodeId],
    mask: Option<&[bool]>,
    metric: Metric,
) -> Result<Partition, PathError> {
    if sources.is_empty() {
        return Err(PathError::EmptySourceSet);
    }
    for &s in sources {
        check_node(graph, s)?;
    }
    let mut sorted: Vec<NodeId> = sources.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let result = search(graph, &sorted, metric, SearchOptions { mask, ..Default::default() });
    Ok(Partition {
        sources: sorted,
        nearest: result.nearest,
        distance: result.distance,
        parent: result.parent,
    })
}

/// Distance oracle: exact distances from a chosen source set (or all nodes)
/// to everywhere, used to score routes.
#[derive(Debug, Clone)]
pub struct DistanceOracle {
    metric: Metric,
    node_count: usize,
    rows: BTreeMap<NodeId, Vec<f64>>,
}

impl DistanceOracle {
    /// Builds distance rows for the given sources. Rows are independent
    /// Dijkstra runs over the immutable graph and run in parallel.
    pub fn for_sources(
        graph: &Graph,
        sources: impl IntoIterator<Item = NodeId>,
        metric: Metric,
    ) -> Result<DistanceOracle, PathError> {
        let set: BTreeSet<NodeId> = sources.into_iter().collect();
        for &s in &set {
            check_node(graph, s)?;
        }
        use rayon::prelude::*;
        let order: Vec<NodeId> = set.into_iter().collect();
        let rows: Vec<Vec<f64>> = order
            .par_iter()
            .map(|&s| {
                search(graph, &[s], metric, SearchOptions::default()).distance
            })
            .collect();
        Ok(DistanceOracle {
            metric,
            node_count: graph.node_count(),
            rows: order.into_iter().zip(rows).collect(),
        })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// d(s, t) if either endpoint's row is present (distances are symmetric
    /// on undirected graphs).
    pub fn distance(&self, s: NodeId, t: NodeId) -> Option<f64> {
        if let Some(row) = self.rows.get(&s) {
            return Some(row[t]);
        }
        self.rows.get(&t).map(|row| row[s])
    }
}

/// Full all-pairs oracle. Rejects graphs above `DEFAULT_ALL_PAIRS_CAP`
/// nodes; experiments beyond the cap sample pairs instead.
pub fn all_pairs(graph: &Graph, metric: Metric) -> Result<DistanceOracle, PathError> {
    let n = graph.node_count();
    if n > DEFAULT_ALL_PAIRS_CAP {
        return Err(PathError::GraphTooLarge { node_count: n, cap: DEFAULT_ALL_PAIRS_CAP });
    }
    DistanceOracle::for_sources(graph, 0..n, metric)
}

//! Recursively stacked compactization and hierarchical partition-tree
//! routing.
//!
//! Stacking level i splits the network into a partition tree of depth
//! D = 2^i with uniform target branching b = ceil(N^(1/D)): the root holds
//! all nodes, every cluster is split into at most b shortest-path Voronoi
//! cells around uniformly sampled landmarks, and leaves sit at level D-1.
//! Each node keeps D tables: for every refinement level one next-hop entry
//! per sibling cluster (toward that cluster's landmark along a shortest
//! path confined to the common parent cluster), plus direct entries for its
//! leaf co-members (along paths inside the leaf). Keeping each entry's path
//! inside the cluster the entry lives in makes longest-prefix forwarding
//! provably loop-free: the agreement level with the destination never
//! decreases, and within one level the distance to that level's target
//! landmark strictly shrinks. Predicted totals follow 2^i * N^(1/2^i); the
//! stretch estimate 3^i is audited by measurement, never asserted.
//!
//! Hierarchical routing with fixed branching k is the same construction at
//! depth ceil(log_k N), giving the k * log_k N table law; both builders
//! share one code path, so equal (depth, branching, seed) means an
//! identical scheme.

use crate::compact::bits_for_ids;
use crate::route::{RouteError, RoutePath, RoutingScheme};
use crate::shortest_path::{multi_source_partition_within, search, SearchOptions};
use crate::topology::{Graph, Metric, NodeId};

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum StackedError {
    /// N^(1/2^i) < 2: the graph cannot sustain nontrivial clusters at this
    /// stacking level.
    InvalidDepth { i: u32, node_count: usize },
    InvalidBranching { k: u64 },
}

impl fmt::Display for StackedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackedError::InvalidDepth { i, node_count } => write!(
                f,
                "stacking level {i} needs at least 2^(2^{i}) nodes, graph has {node_count}"
            ),
            StackedError::InvalidBranching { k } => {
                write!(f, "branching {k} not supported (need 2 <= k <= 65535)")
            }
        }
    }
}

impl std::error::Error for StackedError {}

/// Smallest m with m^d >= target.
fn nth_root_ceil(target: &BigUint, d: u32) -> u64 {
    let bits = target.bits();
    let mut lo = 1u64;
    // 2^ceil(bits/d) is an upper bound: (2^ceil(bits/d))^d >= 2^bits > target - 1.
    let mut hi = 1u64 << (bits.div_ceil(d as u64)).min(63);
    if hi == 0 {
        hi = u64::MAX;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if BigUint::from(mid).pow(d) >= *target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// ceil(2^i * N^(1/2^i)): the predicted total table entries per node at
/// stacking level i. Exact integer arithmetic: the result is the smallest m
/// with m^D >= N * D^D for D = 2^i. i = 0 degenerates to N, the plain full
/// table.
pub fn predicted_table_total(n: u64, i: u32) -> u64 {
    assert!(n >= 1, "N must be positive");
    assert!(i <= 20, "stacking level {i} is beyond any meaningful table count");
    let d = 1u64 << i;
    if d == 1 {
        return n;
    }
    let target = BigUint::from(n) * BigUint::from(d).pow(d as u32);
    nth_root_ceil(&target, d as u32)
}

/// 3^i: the heuristic stretch estimate for stacking level i.
pub fn predicted_stretch_bound(i: u32) -> u64 {
    3u64.checked_pow(i).expect("stretch bound overflows u64")
}

/// Smallest i with N^(1/2^i) <= k, i.e. with N <= k^(2^i): the stacking
/// level that pushes per-level tables under the threshold k.
pub fn min_depth_for_threshold(n: u64, k: u64) -> u32 {
    assert!(n >= 1, "N must be positive");
    assert!(k >= 2, "threshold must be at least 2");
    let n = BigUint::from(n);
    let mut power = BigUint::from(k);
    let mut i = 0;
    while power < n {
        power = &power * &power;
        i += 1;
    }
    i
}

/// ceil(N^(1/depth)): smallest b with b^depth >= N.
pub(crate) fn branching_for(n: u64, depth: u32) -> u64 {
    nth_root_ceil(&BigUint::from(n), depth)
}

/// ceil(log_k N) clamped to at least 1: smallest positive d with k^d >= N.
pub(crate) fn depth_for(n: u64, k: u64) -> u32 {
    let n = BigUint::from(n);
    let mut power = BigUint::from(k);
    let mut d = 1;
    while power < n {
        power *= k;
        d += 1;
    }
    d
}

/// One cluster of the partition tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    /// Child-index path from the root; empty at the root.
    pub path: Vec<u16>,
    /// The landmark anchoring this cluster; None only at the root, which is
    /// never a forwarding target.
    pub landmark: Option<NodeId>,
    /// Sorted member list.
    pub members: Vec<NodeId>,
    pub children: Vec<ClusterNode>,
}

/// Recursive cluster hierarchy: level 0 is the root cluster holding every
/// node, each level refines the previous by shortest-path Voronoi cells, and
/// leaves sit at level depth-1.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTree {
    /// D: the per-node table count.
    pub depth: u32,
    /// Target cluster count per split.
    pub branching: u64,
    pub root: ClusterNode,
    digits: Vec<Vec<u16>>,
}

impl PartitionTree {
    /// Child-index path of a node, one digit per refinement level.
    pub fn digits(&self, node: NodeId) -> &[u16] {
        &self.digits[node]
    }

    /// Upper bound on label bits: digit bits per level plus the bits needed
    /// to name a node inside its leaf.
    pub fn label_bit_length(&self) -> u32 {
        let mut per_level_max: Vec<usize> = vec![0; (self.depth - 1) as usize];
        let mut max_leaf = 0usize;
        let mut stack = vec![&self.root];
        while let Some(c) = stack.pop() {
            if c.children.is_empty() {
                max_leaf = max_leaf.max(c.members.len());
            } else {
                per_level_max[c.path.len()] = per_level_max[c.path.len()].max(c.children.len());
                stack.extend(c.children.iter());
            }
        }
        per_level_max.iter().map(|&b| bits_for_ids(b)).sum::<u32>() + bits_for_ids(max_leaf)
    }
}

/// Routing label: the cluster digit path, terminated by the node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchicalLabel {
    pub node: NodeId,
    pub digits: Vec<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Flavor {
    Stacked { i: u32 },
    Hierarchical { k: u64 },
}

/// Built partition-tree scheme (stacked or hierarchical flavor). Immutable;
/// routing calls are independent and safe to run concurrently.
#[derive(Debug)]
pub struct StackedScheme {
    graph: Arc<Graph>,
    metric: Metric,
    flavor: Flavor,
    tree: PartitionTree,
    /// Per node, per refinement level (index l-1 for tree level l): sibling
    /// cluster digit -> next hop toward that cluster's landmark.
    sibling_tables: Vec<Vec<BTreeMap<u16, NodeId>>>,
    /// Per node: leaf co-member -> next hop along a path inside the leaf.
    leaf_tables: Vec<BTreeMap<NodeId, NodeId>>,
    labels: Vec<HierarchicalLabel>,
}

impl StackedScheme {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn tree(&self) -> &PartitionTree {
        &self.tree
    }

    pub fn label(&self, node: NodeId) -> &HierarchicalLabel {
        &self.labels[node]
    }

    /// Table sizes split by level: depth-1 sibling tables then the leaf
    /// table, for each node.
    pub fn per_level_table_sizes(&self, node: NodeId) -> Vec<usize> {
        let mut sizes: Vec<usize> =
            self.sibling_tables[node].iter().map(BTreeMap::len).collect();
        sizes.push(self.leaf_tables[node].len());
        sizes
    }
}

/// Builds the stacked scheme at level i: depth 2^i, branching
/// ceil(N^(1/2^i)).
pub fn build_stacked(
    graph: Arc<Graph>,
    i: u32,
    metric: Metric,
    seed: u64,
) -> Result<StackedScheme, StackedError> {
    let n = graph.node_count();
    // Pre: N^(1/2^i) >= 2, i.e. N >= 2^(2^i).
    if i >= 6 || (n as u128) < 1u128 << (1u32 << i) {
        return Err(StackedError::InvalidDepth { i, node_count: n });
    }
    let depth = 1u32 << i;
    let branching = branching_for(n as u64, depth);
    build_partition_scheme(graph, depth, branching, metric, seed, Flavor::Stacked { i })
}

/// Builds the hierarchical scheme with fixed branching k at depth
/// ceil(log_k N): the same machinery as [`build_stacked`], realized as a
/// single shared code path.
pub fn build_hierarchical(
    graph: Arc<Graph>,
    k: u64,
    metric: Metric,
    seed: u64,
) -> Result<StackedScheme, StackedError> {
    if k < 2 {
        return Err(StackedError::InvalidBranching { k });
    }
    let depth = depth_for(graph.node_count() as u64, k);
    build_partition_scheme(graph, depth, k, metric, seed, Flavor::Hierarchical { k })
}

struct ClusterBuild {
    path: Vec<u16>,
    landmark: Option<NodeId>,
    members: Vec<NodeId>,
    children: Vec<usize>,
}

fn build_partition_scheme(
    graph: Arc<Graph>,
    depth: u32,
    branching: u64,
    metric: Metric,
    seed: u64,
    flavor: Flavor,
) -> Result<StackedScheme, StackedError> {
    if branching > u16::MAX as u64 {
        return Err(StackedError::InvalidBranching { k: branching });
    }
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits: Vec<Vec<u16>> = vec![Vec::with_capacity(depth as usize - 1); n];

    // Clusters are split level by level in path order, so the random stream
    // is consumed identically for equal (depth, branching, seed).
    let mut arena: Vec<ClusterBuild> = vec![ClusterBuild {
        path: Vec::new(),
        landmark: None,
        members: (0..n).collect(),
        children: Vec::new(),
    }];
    let mut current = vec![0usize];
    let mut mask = vec![false; n];
    for _level in 1..depth {
        let mut next = Vec::new();
        for &ci in &current {
            let members = arena[ci].members.clone();
            let want = (branching as usize).min(members.len());
            // A cluster smaller than the branching target degrades to
            // all-members-as-landmarks instead of failing.
            let mut landmarks: Vec<NodeId> = if want == members.len() {
                members.clone()
            } else {
                rand::seq::index::sample(&mut rng, members.len(), want)
                    .into_iter()
                    .map(|idx| members[idx])
                    .collect()
            };
            landmarks.sort_unstable();

            for &m in &members {
                mask[m] = true;
            }
            let part = multi_source_partition_within(&graph, &landmarks, Some(&mask), metric)
                .expect("cluster landmarks are valid and nonempty");
            for &m in &members {
                mask[m] = false;
            }

            let cells = part.cells();
            for (digit, &lm) in landmarks.iter().enumerate() {
                let cell = cells[&lm].clone();
                let mut path = arena[ci].path.clone();
                path.push(digit as u16);
                for &v in &cell {
                    digits[v].push(digit as u16);
                }
                let child = arena.len();
                arena.push(ClusterBuild {
                    path,
                    landmark: Some(lm),
                    members: cell,
                    children: Vec::new(),
                });
                arena[ci].children.push(child);
                next.push(child);
            }
        }
        current = next;
    }

    // Sibling entries: one shortest-path tree per cluster landmark,
    // restricted to the parent cluster; every node of the parent outside
    // the child points along it. The restriction is what makes forwarding
    // terminate: next-hops never leave the cluster whose level they serve,
    // so the prefix agreement with any destination never shrinks.
    let mut sibling_tables: Vec<Vec<BTreeMap<u16, NodeId>>> =
        (0..n).map(|_| vec![BTreeMap::new(); depth as usize - 1]).collect();
    for parent in 0..arena.len() {
        if arena[parent].children.is_empty() {
            continue;
        }
        let level = arena[parent].path.len();
        for &m in &arena[parent].members {
            mask[m] = true;
        }
        for child_pos in 0..arena[parent].children.len() {
            let ci = arena[parent].children[child_pos];
            let lm = arena[ci].landmark.expect("non-root clusters carry a landmark");
            let digit = *arena[ci].path.last().unwrap();
            let tree = search(
                &graph,
                &[lm],
                metric,
                SearchOptions { mask: Some(&mask), ..Default::default() },
            );
            for sibling_pos in 0..arena[parent].children.len() {
                if sibling_pos == child_pos {
                    continue;
                }
                let si = arena[parent].children[sibling_pos];
                for &v in &arena[si].members {
                    let hop = tree.parent[v].expect("parent clusters are connected");
                    sibling_tables[v][level].insert(digit, hop);
                }
            }
        }
        for &m in &arena[parent].members {
            mask[m] = false;
        }
    }

    // Leaf entries: searches restricted to the (connected) leaf keep
    // intra-leaf forwarding inside the leaf.
    let mut leaf_tables: Vec<BTreeMap<NodeId, NodeId>> = vec![BTreeMap::new(); n];
    for cluster in &arena {
        if !cluster.children.is_empty() {
            continue;
        }
        for &m in &cluster.members {
            mask[m] = true;
        }
        for &t in &cluster.members {
            let res = search(
                &graph,
                &[t],
                metric,
                SearchOptions { mask: Some(&mask), ..Default::default() },
            );
            for &v in &cluster.members {
                if v != t {
                    leaf_tables[v].insert(t, res.parent[v].expect("leaf clusters are connected"));
                }
            }
        }
        for &m in &cluster.members {
            mask[m] = false;
        }
    }

    let root = assemble(&arena, 0);
    let labels = (0..n)
        .map(|v| HierarchicalLabel { node: v, digits: digits[v].clone() })
        .collect();
    Ok(StackedScheme {
        graph,
        metric,
        flavor,
        tree: PartitionTree { depth, branching, root, digits },
        sibling_tables,
        leaf_tables,
        labels,
    })
}

fn assemble(arena: &[ClusterBuild], index: usize) -> ClusterNode {
    let c = &arena[index];
    ClusterNode {
        path: c.path.clone(),
        landmark: c.landmark,
        members: c.members.clone(),
        children: c.children.iter().map(|&ci| assemble(arena, ci)).collect(),
    }
}

/// Longest-common-prefix forwarding: at each node, compare the node's digit
/// path with the destination label and forward toward the entry for the
/// destination's cluster at the first disagreeing level, or along the leaf
/// table once the paths fully agree.
pub fn route_stacked(
    scheme: &StackedScheme,
    source: NodeId,
    dest_label: &HierarchicalLabel,
) -> Result<RoutePath, RouteError> {
    let n = scheme.graph.node_count();
    if source >= n {
        return Err(RouteError::InvalidNode { node: source, node_count: n });
    }
    let dest = dest_label.node;
    if dest >= n || scheme.labels[dest] != *dest_label {
        return Err(RouteError::LabelMismatch { node: dest });
    }

    let ddigits = &dest_label.digits;
    let mut nodes = vec![source];
    let mut visited: HashSet<NodeId> = HashSet::new();
    visited.insert(source);
    let mut at = source;
    while at != dest {
        let adigits = scheme.tree.digits(at);
        let lcp = adigits.iter().zip(ddigits).take_while(|(a, d)| a == d).count();
        let entry = if lcp == ddigits.len() {
            scheme.leaf_tables[at].get(&dest)
        } else {
            scheme.sibling_tables[at][lcp].get(&ddigits[lcp])
        };
        let next = match entry {
            Some(&hop) => hop,
            None => return Err(RouteError::ForwardingStuck { at, dest }),
        };
        if !visited.insert(next) {
            return Err(RouteError::ForwardingStuck { at: next, dest });
        }
        nodes.push(next);
        at = next;
    }
    Ok(RoutePath::from_nodes(&scheme.graph, nodes))
}

/// Diagnostic dump: one "node | level-path | per-level table sizes" line per
/// node; the last size is the leaf table.
pub fn dump_tree(scheme: &StackedScheme) -> String {
    let mut out = String::new();
    for v in 0..scheme.graph.node_count() {
        let digits = scheme.tree.digits(v);
        let path = if digits.is_empty() {
            "-".to_string()
        } else {
            digits.iter().map(u16::to_string).collect::<Vec<_>>().join(".")
        };
        let sizes = scheme
            .per_level_table_sizes(v)
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("{v} | {path} | {sizes}\n"));
    }
    out
}

impl RoutingScheme for StackedScheme {
    fn scheme_name(&self) -> String {
        match self.flavor {
            Flavor::Stacked { i } => format!("stacked(i={i})"),
            Flavor::Hierarchical { k } => format!("hierarchical(k={k})"),
        }
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
        route_stacked(self, source, &self.labels[dest])
    }

    fn table_sizes(&self) -> Vec<usize> {
        (0..self.graph.node_count())
            .map(|v| self.per_level_table_sizes(v).iter().sum())
            .collect()
    }

    fn predicted_table_entries(&self) -> u64 {
        let n = self.graph.node_count() as u64;
        match self.flavor {
            Flavor::Stacked { i } => predicted_table_total(n, i),
            Flavor::Hierarchical { k } => k * depth_for(n, k) as u64,
        }
    }

    fn stretch_bound(&self) -> f64 {
        let doublings = match self.flavor {
            Flavor::Stacked { i } => i,
            // Depth D sits between stacking levels; take the next full one.
            Flavor::Hierarchical { .. } => {
                let mut doublings = 0;
                while 1u32 << doublings < self.tree.depth {
                    doublings += 1;
                }
                doublings
            }
        };
        predicted_stretch_bound(doublings) as f64
    }
}

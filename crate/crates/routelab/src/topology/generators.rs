//! Synthetic topology generators.
//!
//! All generators are deterministic for a fixed seed and produce graphs that
//! satisfy every [`Graph`](super::Graph) invariant. Randomness comes from a
//! ChaCha8 stream seeded with the caller's integer seed, so edge lists are
//! reproducible across platforms.

use super::{Graph, NodeId, TopologyError};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Preferential-attachment (Barabási-Albert style) scale-free graph.
///
/// Starts from a complete clique on `attach_m + 1` nodes; every later node
/// attaches to `attach_m` distinct existing nodes sampled proportionally to
/// degree. All rtt weights are 1.0, so the hop and RTT metrics coincide.
pub fn generate_scale_free(
    n: usize,
    attach_m: usize,
    seed: u64,
) -> Result<Graph, TopologyError> {
    if attach_m < 1 {
        return Err(TopologyError::InvalidParameters(
            "attach_m must be at least 1".into(),
        ));
    }
    if n < attach_m + 1 {
        return Err(TopologyError::InvalidParameters(format!(
            "n must be at least attach_m + 1 = {}",
            attach_m + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    // Each edge endpoint appears once per incidence; sampling an index from
    // this list is degree-proportional sampling.
    let mut endpoints: Vec<NodeId> = Vec::new();

    let core = attach_m + 1;
    for u in 0..core {
        for v in (u + 1)..core {
            edges.push((u, v, 1.0));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    for v in core..n {
        let mut targets: Vec<NodeId> = Vec::with_capacity(attach_m);
        while targets.len() < attach_m {
            let pick = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
        for &t in &targets {
            edges.push((t, v, 1.0));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::from_edges(n, edges)
}

/// Connectivity-threshold radius for [`generate_geometric`]: 1.5 times the
/// asymptotic threshold sqrt(ln n / (pi n)) for uniform points in the unit
/// square. Callers wanting sparser (higher-diameter) graphs pass their own
/// smaller radius and rely on the generator's bounded retries.
pub fn geometric_radius(n: usize) -> f64 {
    1.5 * ((n as f64).ln() / (std::f64::consts::PI * n as f64)).sqrt()
}

const GEOMETRIC_MAX_ATTEMPTS: usize = 100;

/// Random geometric graph: `n` points uniform in the unit square, an edge
/// wherever the Euclidean distance is at most `radius`, rtt weight equal to
/// that distance. Placement is retried from the same random stream until
/// connected, up to a bounded attempt count.
pub fn generate_geometric(n: usize, radius: f64, seed: u64) -> Result<Graph, TopologyError> {
    if n < 2 {
        return Err(TopologyError::InvalidParameters("n must be at least 2".into()));
    }
    if !radius.is_finite() || radius <= 0.0 {
        return Err(TopologyError::InvalidParameters("radius must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GEOMETRIC_MAX_ATTEMPTS {
        let points: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect();
        if let Some(edges) = geometric_edges(&points, radius) {
            if let Ok(graph) = Graph::from_edges(n, edges) {
                return Ok(graph);
            }
        }
    }
    Err(TopologyError::CouldNotConnect { attempts: GEOMETRIC_MAX_ATTEMPTS })
}

/// All pairs within `radius`, found via a uniform grid of radius-sized
/// buckets. Returns None if two points coincide exactly (a zero-weight edge),
/// which counts as a failed placement.
fn geometric_edges(points: &[(f64, f64)], radius: f64) -> Option<Vec<(NodeId, NodeId, f64)>> {
    // Cell width must be at least the radius for the 3x3 scan to see every
    // candidate; capping the side at sqrt(n) keeps the grid O(n) when the
    // radius is tiny.
    let side_by_radius = (1.0 / radius).floor().max(1.0);
    let side_cap = (points.len() as f64).sqrt().ceil().max(1.0);
    let cells = side_by_radius.min(side_cap) as usize;
    let cell_of = |x: f64| ((x * cells as f64) as usize).min(cells - 1);
    let mut grid: Vec<Vec<NodeId>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in points.iter().enumerate() {
        grid[cell_of(y) * cells + cell_of(x)].push(i);
    }
    let mut edges = Vec::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        for ny in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for nx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &j in &grid[ny * cells + nx] {
                    if j <= i {
                        continue;
                    }
                    let (px, py) = points[j];
                    let dist = ((x - px).powi(2) + (y - py).powi(2)).sqrt();
                    if dist <= radius {
                        if dist == 0.0 {
                            return None;
                        }
                        edges.push((i, j, dist));
                    }
                }
            }
        }
    }
    Some(edges)
}

/// Two-level AS-like topology: `domain_count` internally connected domains of
/// `nodes_per_domain` nodes each, joined by exactly `inter_edges` border
/// links. Intra-domain weights are drawn from [0.1, 1), inter-domain weights
/// from [10, 100), so the ranges never overlap.
#[derive(Debug, Clone)]
pub struct TwoLevelGraph {
    pub graph: Graph,
    /// Domain id of each node; node v belongs to domain v / nodes_per_domain.
    pub domain_of: Vec<usize>,
}

pub fn generate_two_level(
    domain_count: usize,
    nodes_per_domain: usize,
    inter_edges: usize,
    seed: u64,
) -> Result<TwoLevelGraph, TopologyError> {
    if domain_count < 1 || nodes_per_domain < 1 {
        return Err(TopologyError::InvalidParameters("counts must be at least 1".into()));
    }
    if inter_edges + 1 < domain_count {
        return Err(TopologyError::InvalidParameters(
            "inter_edges must be at least domain_count - 1".into(),
        ));
    }
    // Distinct node pairs available for border links.
    let max_inter =
        domain_count * (domain_count - 1) / 2 * nodes_per_domain * nodes_per_domain;
    if inter_edges > max_inter {
        return Err(TopologyError::InvalidParameters(format!(
            "inter_edges {inter_edges} exceeds the {max_inter} distinct cross-domain pairs"
        )));
    }

    let n = domain_count * nodes_per_domain;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    let mut used: HashSet<(NodeId, NodeId)> = HashSet::new();
    let push = |edges: &mut Vec<(NodeId, NodeId, f64)>,
                used: &mut HashSet<(NodeId, NodeId)>,
                u: NodeId,
                v: NodeId,
                w: f64|
     -> bool {
        let key = (u.min(v), u.max(v));
        if u == v || !used.insert(key) {
            return false;
        }
        edges.push((key.0, key.1, w));
        true
    };

    let base = |d: usize| d * nodes_per_domain;
    for d in 0..domain_count {
        // Random spanning tree keeps the domain connected; extra edges add
        // internal redundancy.
        for j in 1..nodes_per_domain {
            let anchor = rng.random_range(0..j);
            let w = rng.random_range(0.1..1.0);
            push(&mut edges, &mut used, base(d) + j, base(d) + anchor, w);
        }
        let mut extra = nodes_per_domain / 2;
        let mut attempts = 0;
        while extra > 0 && attempts < 100 * nodes_per_domain {
            attempts += 1;
            let a = base(d) + rng.random_range(0..nodes_per_domain);
            let b = base(d) + rng.random_range(0..nodes_per_domain);
            let w = rng.random_range(0.1..1.0);
            if push(&mut edges, &mut used, a, b, w) {
                extra -= 1;
            }
        }
    }

    let border = |rng: &mut ChaCha8Rng,
                  edges: &mut Vec<(NodeId, NodeId, f64)>,
                  used: &mut HashSet<(NodeId, NodeId)>,
                  da: usize,
                  db: usize|
     -> bool {
        let a = base(da) + rng.random_range(0..nodes_per_domain);
        let b = base(db) + rng.random_range(0..nodes_per_domain);
        let w = rng.random_range(10.0..100.0);
        push(edges, used, a, b, w)
    };

    let mut remaining = inter_edges;
    // Spanning tree over domains guarantees the overlay is connected.
    for d in 1..domain_count {
        let anchor = rng.random_range(0..d);
        while !border(&mut rng, &mut edges, &mut used, d, anchor) {}
        remaining -= 1;
    }
    while remaining > 0 {
        if domain_count < 2 {
            return Err(TopologyError::InvalidParameters(
                "inter_edges require at least two domains".into(),
            ));
        }
        let da = rng.random_range(0..domain_count);
        let db = rng.random_range(0..domain_count);
        if da == db {
            continue;
        }
        if border(&mut rng, &mut edges, &mut used, da, db) {
            remaining -= 1;
        }
    }

    let graph = Graph::from_edges(n, edges)?;
    let domain_of = (0..n).map(|v| v / nodes_per_domain).collect();
    Ok(TwoLevelGraph { graph, domain_of })
}

/// Adversarial "ocean" topology: two unit-weight cliques joined by two
/// bridges of weight `bridge_weight` and `2 * bridge_weight` at distinct
/// endpoints. Hop distances across the two bridges are nearly equal while
/// RTT distances differ by a factor of about 2, so hop-optimal routes can be
/// RTT-poor. The construction is fully deterministic; `seed` is accepted for
/// interface uniformity with the other generators.
pub fn generate_ocean(
    cluster_size: usize,
    bridge_weight: f64,
    _seed: u64,
) -> Result<Graph, TopologyError> {
    if cluster_size < 3 {
        return Err(TopologyError::InvalidParameters("cluster_size must be at least 3".into()));
    }
    if !bridge_weight.is_finite() || bridge_weight < 10.0 {
        return Err(TopologyError::InvalidParameters("bridge_weight must be at least 10".into()));
    }
    let c = cluster_size;
    let mut edges = Vec::new();
    for base in [0, c] {
        for u in 0..c {
            for v in (u + 1)..c {
                edges.push((base + u, base + v, 1.0));
            }
        }
    }
    edges.push((0, c, bridge_weight));
    edges.push((1, c + 1, 2.0 * bridge_weight));
    Graph::from_edges(2 * c, edges)
}

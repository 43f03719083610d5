//! Measurement: stretch distributions, hop-vs-RTT divergence, table-size
//! comparisons, and remoteness profiles.
//!
//! Stretch of a routed pair is route cost divided by the shortest-path
//! distance under the same metric, so every sample is >= 1 up to float
//! noise. Heuristic bounds are audited through [`StretchStats::violation_fraction`]
//! rather than asserted, and all aggregation is order-independent so pair
//! evaluation can run in parallel without changing results.

use crate::route::{RouteError, RoutingScheme};
use crate::shortest_path::{sssp, DistanceOracle};
use crate::topology::{Graph, Metric, NodeId};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    /// The oracle cannot answer d(source, dest).
    OracleUnavailable { source: NodeId, dest: NodeId },
    Route(RouteError),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::OracleUnavailable { source, dest } => {
                write!(f, "no oracle distance for pair ({source}, {dest})")
            }
            MetricsError::Route(e) => write!(f, "routing failed: {e}"),
        }
    }
}

impl std::error::Error for MetricsError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            MetricsError::Route(e) => Some(e),
            MetricsError::OracleUnavailable { .. } => None,
        }
    }
}

impl From<RouteError> for MetricsError {
    fn from(e: RouteError) -> Self {
        MetricsError::Route(e)
    }
}

/// Per-node table sizes with their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSizeSummary {
    pub per_node: Vec<usize>,
    pub mean: f64,
    pub max: usize,
}

impl TableSizeSummary {
    pub fn from_sizes(per_node: Vec<usize>) -> TableSizeSummary {
        let max = per_node.iter().copied().max().unwrap_or(0);
        let mean = if per_node.is_empty() {
            0.0
        } else {
            per_node.iter().map(|&s| s as f64).sum::<f64>() / per_node.len() as f64
        };
        TableSizeSummary { per_node, mean, max }
    }
}

/// A set of ordered (source, dest) pairs, either every pair or a seeded
/// without-replacement sample. Pairs are distinct and never degenerate
/// (source != dest); iteration order is ascending by (source, dest).
#[derive(Debug, Clone, PartialEq)]
pub enum PairSample {
    Exhaustive { node_count: usize },
    Sampled { node_count: usize, indices: Vec<usize>, seed: u64 },
}

/// Default sample size once a graph is past exhaustive evaluation.
pub const DEFAULT_SAMPLED_PAIRS: usize = 10_000;

impl PairSample {
    pub fn exhaustive(node_count: usize) -> PairSample {
        PairSample::Exhaustive { node_count }
    }

    /// Samples `count` distinct ordered pairs (clamped to the number that
    /// exist) uniformly without replacement.
    pub fn sampled(node_count: usize, count: usize, seed: u64) -> PairSample {
        let total = node_count * node_count.saturating_sub(1);
        let count = count.min(total);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices = rand::seq::index::sample(&mut rng, total, count).into_vec();
        indices.sort_unstable();
        PairSample::Sampled { node_count, indices, seed }
    }

    pub fn node_count(&self) -> usize {
        match self {
            PairSample::Exhaustive { node_count } => *node_count,
            PairSample::Sampled { node_count, .. } => *node_count,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PairSample::Exhaustive { node_count } => node_count * node_count.saturating_sub(1),
            PairSample::Sampled { indices, .. } => indices.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Short tag for reporting.
    pub fn mode_name(&self) -> &'static str {
        match self {
            PairSample::Exhaustive { .. } => "exhaustive",
            PairSample::Sampled { .. } => "sampled",
        }
    }

    /// Distinct sources appearing in the sample, ascending.
    pub fn sources(&self) -> Vec<NodeId> {
        match self {
            PairSample::Exhaustive { node_count } => (0..*node_count).collect(),
            PairSample::Sampled { node_count, indices, .. } => {
                let mut sources: Vec<NodeId> =
                    indices.iter().map(|&k| decode_pair(*node_count, k).0).collect();
                sources.dedup();
                sources
            }
        }
    }

    pub fn iter(&self) -> PairIter<'_> {
        PairIter { sample: self, pos: 0 }
    }
}

/// Decodes the k-th ordered pair: row-major over (source, dest != source).
fn decode_pair(node_count: usize, k: usize) -> (NodeId, NodeId) {
    let s = k / (node_count - 1);
    let r = k % (node_count - 1);
    (s, if r >= s { r + 1 } else { r })
}

pub struct PairIter<'a> {
    sample: &'a PairSample,
    pos: usize,
}

impl Iterator for PairIter<'_> {
    type Item = (NodeId, NodeId);

    fn next(&mut self) -> Option<(NodeId, NodeId)> {
        if self.pos >= self.sample.len() {
            return None;
        }
        let k = match self.sample {
            PairSample::Exhaustive { .. } => self.pos,
            PairSample::Sampled { indices, .. } => indices[self.pos],
        };
        self.pos += 1;
        Some(decode_pair(self.sample.node_count(), k))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.sample.len() - self.pos;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PairIter<'_> {}

/// Stretch distribution over a pair sample. Samples are kept sorted;
/// percentiles use the nearest-rank rule.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchStats {
    metric: Metric,
    sorted: Vec<f64>,
    mean: f64,
}

impl StretchStats {
    pub(crate) fn from_samples(metric: Metric, mut samples: Vec<f64>) -> StretchStats {
        samples.sort_by(|a, b| a.partial_cmp(b).expect("stretch values are finite"));
        let mean = if samples.is_empty() {
            f64::NAN
        } else {
            samples.iter().sum::<f64>() / samples.len() as f64
        };
        StretchStats { metric, sorted: samples, mean }
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn sample_count(&self) -> usize {
        self.sorted.len()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn max(&self) -> f64 {
        self.sorted.last().copied().unwrap_or(f64::NAN)
    }

    /// Nearest-rank percentile: the ceil(q*n)-th smallest sample.
    pub fn percentile(&self, q: f64) -> f64 {
        if self.sorted.is_empty() {
            return f64::NAN;
        }
        let rank = (q * self.sorted.len() as f64).ceil() as usize;
        self.sorted[rank.clamp(1, self.sorted.len()) - 1]
    }

    pub fn p50(&self) -> f64 {
        self.percentile(0.50)
    }

    pub fn p99(&self) -> f64 {
        self.percentile(0.99)
    }

    /// Fraction of samples strictly above bound + 1e-9.
    pub fn violation_fraction(&self, bound: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        let over = self.sorted.iter().filter(|&&s| s > bound + 1e-9).count();
        over as f64 / self.sorted.len() as f64
    }
}

fn stretch_of(
    scheme: &dyn RoutingScheme,
    oracle: &DistanceOracle,
    source: NodeId,
    dest: NodeId,
) -> Result<f64, MetricsError> {
    let d = oracle
        .distance(source, dest)
        .ok_or(MetricsError::OracleUnavailable { source, dest })?;
    debug_assert!(d > 0.0, "distinct pairs in a connected graph are at positive distance");
    let path = scheme.route(source, dest)?;
    Ok(path.cost(oracle.metric()) / d)
}

/// Routes every sampled pair and aggregates route-cost / oracle-distance
/// ratios under the oracle's metric.
pub fn stretch_distribution(
    scheme: &dyn RoutingScheme,
    oracle: &DistanceOracle,
    sample: &PairSample,
) -> Result<StretchStats, MetricsError> {
    let pairs: Vec<(NodeId, NodeId)> = sample.iter().collect();
    let samples = pairs
        .par_iter()
        .map(|&(s, t)| stretch_of(scheme, oracle, s, t))
        .collect::<Result<Vec<f64>, MetricsError>>()?;
    Ok(StretchStats::from_samples(oracle.metric(), samples))
}

/// One pair scored under both metrics from a single routed path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStretch {
    pub source: NodeId,
    pub dest: NodeId,
    pub hop_stretch: f64,
    pub rtt_stretch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualStretch {
    pub hop: StretchStats,
    pub rtt: StretchStats,
    /// Per-pair records in sample order, for divergence hunting.
    pub joint: Vec<PairStretch>,
}

/// Routes each pair once and scores the same path under HOP and RTT, so the
/// two distributions are pathwise consistent by construction.
pub fn dual_stretch(
    scheme: &dyn RoutingScheme,
    hop_oracle: &DistanceOracle,
    rtt_oracle: &DistanceOracle,
    sample: &PairSample,
) -> Result<DualStretch, MetricsError> {
    assert_eq!(hop_oracle.metric(), Metric::Hop, "first oracle must price hops");
    assert_eq!(rtt_oracle.metric(), Metric::Rtt, "second oracle must price rtt");
    let pairs: Vec<(NodeId, NodeId)> = sample.iter().collect();
    let joint = pairs
        .par_iter()
        .map(|&(source, dest)| {
            let d_hop = hop_oracle
                .distance(source, dest)
                .ok_or(MetricsError::OracleUnavailable { source, dest })?;
            let d_rtt = rtt_oracle
                .distance(source, dest)
                .ok_or(MetricsError::OracleUnavailable { source, dest })?;
            let path = scheme.route(source, dest)?;
            Ok(PairStretch {
                source,
                dest,
                hop_stretch: path.cost(Metric::Hop) / d_hop,
                rtt_stretch: path.cost(Metric::Rtt) / d_rtt,
            })
        })
        .collect::<Result<Vec<PairStretch>, MetricsError>>()?;
    let hop = StretchStats::from_samples(Metric::Hop, joint.iter().map(|p| p.hop_stretch).collect());
    let rtt = StretchStats::from_samples(Metric::Rtt, joint.iter().map(|p| p.rtt_stretch).collect());
    Ok(DualStretch { hop, rtt, joint })
}

/// Distance distribution over a pair sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RemotenessProfile {
    pub metric: Metric,
    /// (lower edge, upper edge, count). HOP uses one bin per integer
    /// distance; RTT uses equal-width bins up to the observed maximum.
    pub bins: Vec<(f64, f64, u64)>,
    pub diameter: f64,
    pub mean: f64,
    /// Total histogram mass; equals the number of evaluated pairs.
    pub mass: u64,
}

/// How many equal-width bins an RTT profile uses.
const RTT_PROFILE_BINS: usize = 64;

enum DestSet {
    AllOthers,
    List(Vec<NodeId>),
}

/// Pair sample regrouped as (source, destinations), sources ascending.
fn by_source(sample: &PairSample) -> Vec<(NodeId, DestSet)> {
    match sample {
        PairSample::Exhaustive { node_count } => {
            (0..*node_count).map(|s| (s, DestSet::AllOthers)).collect()
        }
        PairSample::Sampled { node_count, indices, .. } => {
            let mut grouped: Vec<(NodeId, DestSet)> = Vec::new();
            for &k in indices {
                let (s, t) = decode_pair(*node_count, k);
                match grouped.last_mut() {
                    Some((src, DestSet::List(dests))) if *src == s => dests.push(t),
                    _ => grouped.push((s, DestSet::List(vec![t]))),
                }
            }
            grouped
        }
    }
}

/// Computes the pairwise distance distribution, diameter, and mean under a
/// metric. Distances come from fresh per-source shortest-path runs, so no
/// all-pairs oracle (and no size cap) is involved.
pub fn remoteness_profile(graph: &Graph, metric: Metric, sample: &PairSample) -> RemotenessProfile {
    assert_eq!(
        sample.node_count(),
        graph.node_count(),
        "pair sample must be drawn over this graph's nodes"
    );
    let grouped = by_source(sample);

    // Per-source scans in parallel, merged in source order; the sequential
    // merge keeps float accumulation deterministic.
    let per_source: Vec<(f64, f64, u64)> = grouped
        .par_iter()
        .map(|(s, dests)| {
            let row = sssp(graph, *s, metric).expect("sample sources are graph nodes");
            let mut sum = 0.0;
            let mut max = 0.0f64;
            let mut count = 0u64;
            let mut scan = |d: f64| {
                sum += d;
                max = max.max(d);
                count += 1;
            };
            match dests {
                DestSet::AllOthers => {
                    for t in 0..graph.node_count() {
                        if t != *s {
                            scan(row.distance[t]);
                        }
                    }
                }
                DestSet::List(list) => {
                    for &t in list {
                        scan(row.distance[t]);
                    }
                }
            }
            (sum, max, count)
        })
        .collect();

    let mut total = 0.0;
    let mut diameter = 0.0f64;
    let mut mass = 0u64;
    for &(sum, max, count) in &per_source {
        total += sum;
        diameter = diameter.max(max);
        mass += count;
    }
    let mean = if mass == 0 { f64::NAN } else { total / mass as f64 };

    // Second pass bins against the known range.
    let bin_count = match metric {
        Metric::Hop => diameter.round() as usize,
        Metric::Rtt => {
            if mass == 0 {
                0
            } else {
                RTT_PROFILE_BINS
            }
        }
    };
    let bin_of = |d: f64| -> usize {
        match metric {
            Metric::Hop => d.round() as usize - 1,
            Metric::Rtt => (((d / diameter) * bin_count as f64) as usize).min(bin_count - 1),
        }
    };
    let per_source_bins: Vec<Vec<u64>> = grouped
        .par_iter()
        .map(|(s, dests)| {
            let row = sssp(graph, *s, metric).expect("sample sources are graph nodes");
            let mut counts = vec![0u64; bin_count];
            match dests {
                DestSet::AllOthers => {
                    for t in 0..graph.node_count() {
                        if t != *s {
                            counts[bin_of(row.distance[t])] += 1;
                        }
                    }
                }
                DestSet::List(list) => {
                    for &t in list {
                        counts[bin_of(row.distance[t])] += 1;
                    }
                }
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; bin_count];
    for local in &per_source_bins {
        for (total, c) in counts.iter_mut().zip(local) {
            *total += c;
        }
    }
    let bins = counts
        .iter()
        .enumerate()
        .map(|(j, &c)| match metric {
            Metric::Hop => ((j + 1) as f64, (j + 1) as f64, c),
            Metric::Rtt => {
                let width = diameter / bin_count as f64;
                (j as f64 * width, (j + 1) as f64 * width, c)
            }
        })
        .collect();

    RemotenessProfile { metric, bins, diameter, mean, mass }
}

/// One comparative row of measured vs predicted table sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSizeRow {
    pub scheme: String,
    pub node_count: usize,
    pub mean: f64,
    pub max: usize,
    pub predicted: u64,
}

pub fn table_size_report(schemes: &[&dyn RoutingScheme]) -> Vec<TableSizeRow> {
    schemes
        .iter()
        .map(|scheme| {
            let summary = TableSizeSummary::from_sizes(scheme.table_sizes());
            TableSizeRow {
                scheme: scheme.scheme_name(),
                node_count: scheme.graph().node_count(),
                mean: summary.mean,
                max: summary.max,
                predicted: scheme.predicted_table_entries(),
            }
        })
        .collect()
}

/// One stretch CSV row: a stats block plus its experiment coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchRow {
    pub scheme: String,
    pub graph: String,
    pub seed: u64,
    pub stats: StretchStats,
    /// The scheme's predicted stretch bound, audited via violation_fraction.
    pub bound: f64,
}

pub const STRETCH_CSV_HEADER: [&str; 11] = [
    "scheme",
    "graph",
    "seed",
    "metric",
    "pairs",
    "mean",
    "max",
    "p50",
    "p99",
    "violation_fraction",
    "bound",
];

/// Writes stretch rows as CSV with the fixed header. Callers order rows
/// canonically first; this function writes them as given.
pub fn write_stretch_csv<W: Write>(writer: W, rows: &[StretchRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STRETCH_CSV_HEADER)?;
    for row in rows {
        w.write_record([
            row.scheme.as_str(),
            row.graph.as_str(),
            &row.seed.to_string(),
            row.stats.metric().name(),
            &row.stats.sample_count().to_string(),
            &row.stats.mean().to_string(),
            &row.stats.max().to_string(),
            &row.stats.p50().to_string(),
            &row.stats.p99().to_string(),
            &row.stats.violation_fraction(row.bound).to_string(),
            &row.bound.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const TABLES_CSV_HEADER: [&str; 7] =
    ["scheme", "graph", "seed", "n", "mean", "max", "predicted"];

/// Writes measured-vs-predicted table-size rows with the fixed header.
pub fn write_tables_csv<W: Write>(
    writer: W,
    rows: &[(String, u64, TableSizeRow)],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TABLES_CSV_HEADER)?;
    for (graph, seed, row) in rows {
        w.write_record([
            row.scheme.as_str(),
            graph.as_str(),
            &seed.to_string(),
            &row.node_count.to_string(),
            &row.mean.to_string(),
            &row.max.to_string(),
            &row.predicted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

//! Configuration-driven experiment runner.
//!
//! One run takes a validated [`ExperimentConfig`] and, for every seed,
//! regenerates the topology, rebuilds every scheme, evaluates every metric,
//! and appends CSV rows. Seeds are full independent replications: the graph
//! and all landmark choices are reseeded together. Rows are sorted
//! canonically by (seed, scheme, metric) before writing, so thread counts
//! and evaluation order never change the output bytes.

pub mod config;

pub use config::{
    validate_config, ExperimentConfig, PairSpec, SchemeSpec, TopologySpec, CONFIG_VERSION,
};

use crate::compact::{build_compact, default_landmark_count, select_landmarks};
use crate::metrics::{
    stretch_distribution, table_size_report, write_stretch_csv, write_tables_csv, PairSample,
    StretchRow, TableSizeRow,
};
use crate::route::{ExactScheme, RoutingScheme};
use crate::shortest_path::{all_pairs, DistanceOracle, PathError};
use crate::stacked::{
    branching_for, build_hierarchical, build_stacked, min_depth_for_threshold,
    predicted_stretch_bound, predicted_table_total,
};
use crate::topology::{
    generate_geometric, generate_ocean, generate_scale_free, generate_two_level, geometric_radius,
    load_edge_list, Graph, Metric,
};

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Debug)]
pub enum HarnessError {
    /// The config text is not valid TOML for the schema.
    Parse(String),
    /// The config parsed but a field fails validation.
    ConfigInvalid { field: String, reason: String },
    Io { path: PathBuf, source: std::io::Error },
    /// A module error during the run, wrapped with experiment context.
    Run { context: String, message: String },
}

impl HarnessError {
    /// Process exit code: 2 for config problems, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse(_) | HarnessError::ConfigInvalid { .. } => 2,
            HarnessError::Io { .. } | HarnessError::Run { .. } => 3,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Parse(msg) => write!(f, "config parse error: {msg}"),
            HarnessError::ConfigInvalid { field, reason } => {
                write!(f, "invalid config at `{field}`: {reason}")
            }
            HarnessError::Io { path, source } => {
                write!(f, "io error on {}: {source}", path.display())
            }
            HarnessError::Run { context, message } => write!(f, "{context}: {message}"),
        }
    }
}

impl std::error::Error for HarnessError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            HarnessError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// What one [`run_experiment`] call did.
#[derive(Debug)]
pub struct RunRecord {
    pub config_digest: String,
    pub seeds: Vec<u64>,
    pub stretch_rows: usize,
    pub table_rows: usize,
    pub phase_wall: Vec<(&'static str, Duration)>,
    pub stretch_csv: PathBuf,
    pub tables_csv: PathBuf,
}

fn run_error(context: String, message: impl fmt::Display) -> HarnessError {
    HarnessError::Run { context, message: message.to_string() }
}

/// Generates or loads the graph for one replication.
pub fn realize_topology(spec: &TopologySpec, seed: u64) -> Result<Graph, HarnessError> {
    let context = || format!("topology {}, seed {seed}", spec.name());
    match spec {
        TopologySpec::Geometric { n, radius } => {
            let r = radius.unwrap_or_else(|| geometric_radius(*n));
            generate_geometric(*n, r, seed).map_err(|e| run_error(context(), e))
        }
        TopologySpec::ScaleFree { n, attach_m } => {
            generate_scale_free(*n, *attach_m, seed).map_err(|e| run_error(context(), e))
        }
        TopologySpec::TwoLevel { domains, nodes_per_domain, inter_edges } => {
            generate_two_level(*domains, *nodes_per_domain, *inter_edges, seed)
                .map(|t| t.graph)
                .map_err(|e| run_error(context(), e))
        }
        TopologySpec::Ocean { cluster_size, bridge_weight } => {
            generate_ocean(*cluster_size, *bridge_weight, seed).map_err(|e| run_error(context(), e))
        }
        TopologySpec::File { path } => {
            let text = fs::read_to_string(path)
                .map_err(|e| HarnessError::Io { path: path.clone(), source: e })?;
            load_edge_list(&text).map_err(|e| run_error(context(), e))
        }
    }
}

/// Builds one scheme under the configured build metric.
pub fn build_scheme(
    spec: &SchemeSpec,
    graph: &Arc<Graph>,
    metric: Metric,
    seed: u64,
) -> Result<Box<dyn RoutingScheme>, HarnessError> {
    match spec {
        SchemeSpec::Exact => Ok(Box::new(ExactScheme::build(Arc::clone(graph), metric))),
        SchemeSpec::Compact { landmarks, strategy } => {
            let count = landmarks.unwrap_or_else(|| default_landmark_count(graph.node_count()));
            let set = select_landmarks(graph, count, *strategy, seed, metric)
                .map_err(|e| run_error(format!("scheme compact, seed {seed}"), e))?;
            Ok(Box::new(build_compact(Arc::clone(graph), set, metric)))
        }
        SchemeSpec::Stacked { i } => build_stacked(Arc::clone(graph), *i, metric, seed)
            .map(|s| Box::new(s) as Box<dyn RoutingScheme>)
            .map_err(|e| run_error(format!("scheme stacked(i={i}), seed {seed}"), e)),
        SchemeSpec::Hierarchical { k } => build_hierarchical(Arc::clone(graph), *k, metric, seed)
            .map(|s| Box::new(s) as Box<dyn RoutingScheme>)
            .map_err(|e| run_error(format!("scheme hierarchical(k={k}), seed {seed}"), e)),
    }
}

fn oracle_for(
    graph: &Graph,
    metric: Metric,
    sample: &PairSample,
) -> Result<DistanceOracle, PathError> {
    match sample {
        // Exhaustive evaluation wants every row (and inherits the all-pairs
        // cap); sampled evaluation only needs rows for sampled sources.
        PairSample::Exhaustive { .. } => all_pairs(graph, metric),
        PairSample::Sampled { .. } => DistanceOracle::for_sources(graph, sample.sources(), metric),
    }
}

/// Runs the whole experiment and writes `stretch.csv` and `tables.csv` under
/// `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<RunRecord, HarnessError> {
    let mut generate_wall = Duration::ZERO;
    let mut build_wall = Duration::ZERO;
    let mut evaluate_wall = Duration::ZERO;

    let graph_name = config.topology.name();
    let mut stretch_rows: Vec<StretchRow> = Vec::new();
    let mut table_rows: Vec<(String, u64, TableSizeRow)> = Vec::new();

    for &seed in &config.seeds {
        let start = Instant::now();
        let graph = Arc::new(realize_topology(&config.topology, seed)?);
        generate_wall += start.elapsed();

        let start = Instant::now();
        let schemes = config
            .schemes
            .iter()
            .map(|spec| build_scheme(spec, &graph, config.build_metric, seed))
            .collect::<Result<Vec<Box<dyn RoutingScheme>>, HarnessError>>()?;
        build_wall += start.elapsed();

        let start = Instant::now();
        let sample = config.pairs.realize(graph.node_count(), seed);
        for &metric in &config.metrics {
            let oracle = oracle_for(&graph, metric, &sample)
                .map_err(|e| run_error(format!("oracle {metric}, seed {seed}"), e))?;
            for scheme in &schemes {
                let stats = stretch_distribution(scheme.as_ref(), &oracle, &sample).map_err(
                    |e| run_error(format!("scheme {}, seed {seed}", scheme.scheme_name()), e),
                )?;
                stretch_rows.push(StretchRow {
                    scheme: scheme.scheme_name(),
                    graph: graph_name.clone(),
                    seed,
                    stats,
                    bound: scheme.stretch_bound(),
                });
            }
        }
        let refs: Vec<&dyn RoutingScheme> = schemes.iter().map(Box::as_ref).collect();
        for row in table_size_report(&refs) {
            table_rows.push((graph_name.clone(), seed, row));
        }
        evaluate_wall += start.elapsed();
    }

    stretch_rows.sort_by(|a, b| {
        (a.seed, &a.scheme, a.stats.metric().name()).cmp(&(b.seed, &b.scheme, b.stats.metric().name()))
    });
    table_rows.sort_by(|a, b| (a.1, &a.2.scheme).cmp(&(b.1, &b.2.scheme)));

    let start = Instant::now();
    fs::create_dir_all(out_dir)
        .map_err(|e| HarnessError::Io { path: out_dir.to_path_buf(), source: e })?;
    let stretch_csv = out_dir.join("stretch.csv");
    let file = fs::File::create(&stretch_csv)
        .map_err(|e| HarnessError::Io { path: stretch_csv.clone(), source: e })?;
    write_stretch_csv(file, &stretch_rows)
        .map_err(|e| run_error("writing stretch.csv".to_string(), e))?;
    let tables_csv = out_dir.join("tables.csv");
    let file = fs::File::create(&tables_csv)
        .map_err(|e| HarnessError::Io { path: tables_csv.clone(), source: e })?;
    write_tables_csv(file, &table_rows)
        .map_err(|e| run_error("writing tables.csv".to_string(), e))?;
    let write_wall = start.elapsed();

    Ok(RunRecord {
        config_digest: config.digest(),
        seeds: config.seeds.clone(),
        stretch_rows: stretch_rows.len(),
        table_rows: table_rows.len(),
        phase_wall: vec![
            ("generate", generate_wall),
            ("build", build_wall),
            ("evaluate", evaluate_wall),
            ("write", write_wall),
        ],
        stretch_csv,
        tables_csv,
    })
}

/// The table-size law worked through for one (N, k): the stacking level
/// that gets per-level tables under k, the resulting totals, and the stretch
/// estimate. Stable `key = value` lines.
pub fn formulas_report(n: u64, k: u64) -> Result<String, HarnessError> {
    if n < 1 {
        return Err(HarnessError::ConfigInvalid {
            field: "n".to_string(),
            reason: format!("{n} must be at least 1"),
        });
    }
    if k < 2 {
        return Err(HarnessError::ConfigInvalid {
            field: "k".to_string(),
            reason: format!("{k} must be at least 2"),
        });
    }
    let i = min_depth_for_threshold(n, k);
    let levels = 1u64 << i;
    let per_level = branching_for(n, levels as u32);
    let table_total = predicted_table_total(n, i);
    let stretch_bound = predicted_stretch_bound(i);
    Ok(format!(
        "N = {n}\nk = {k}\ni = {i}\nlevels = {levels}\nper_level = {per_level}\n\
         table_total = {table_total}\nstretch_bound = {stretch_bound}\n"
    ))
}

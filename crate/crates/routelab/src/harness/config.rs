//! Experiment configuration: a versioned TOML file validated into typed
//! specs before anything runs.
//!
//! Counts deserialize as signed integers so that a negative value fails
//! validation with its field path instead of a generic parse error. The
//! digest hashes a canonical rendering of the validated config (defaults
//! applied, fields in fixed order), so key order and comments in the source
//! text never change it; the output directory is excluded because it does
//! not affect results.

use super::HarnessError;
use crate::compact::LandmarkStrategy;
use crate::metrics::{PairSample, DEFAULT_SAMPLED_PAIRS};
use crate::shortest_path::DEFAULT_ALL_PAIRS_CAP;
use crate::topology::Metric;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::PathBuf;

/// The config schema revision this build understands.
pub const CONFIG_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    Geometric { n: usize, radius: Option<f64> },
    ScaleFree { n: usize, attach_m: usize },
    TwoLevel { domains: usize, nodes_per_domain: usize, inter_edges: usize },
    Ocean { cluster_size: usize, bridge_weight: f64 },
    File { path: PathBuf },
}

impl TopologySpec {
    /// Stable tag used in CSV rows and error context.
    pub fn name(&self) -> String {
        match self {
            TopologySpec::Geometric { n, radius } => match radius {
                Some(r) => format!("geometric(n={n},r={r})"),
                None => format!("geometric(n={n},r=auto)"),
            },
            TopologySpec::ScaleFree { n, attach_m } => format!("scale_free(n={n},m={attach_m})"),
            TopologySpec::TwoLevel { domains, nodes_per_domain, inter_edges } => {
                format!("two_level(d={domains},k={nodes_per_domain},x={inter_edges})")
            }
            TopologySpec::Ocean { cluster_size, bridge_weight } => {
                format!("ocean(c={cluster_size},w={bridge_weight})")
            }
            TopologySpec::File { path } => format!("file({})", path.display()),
        }
    }

    /// Node count when it is derivable without generating the graph.
    pub fn node_count_hint(&self) -> Option<usize> {
        match self {
            TopologySpec::Geometric { n, .. } | TopologySpec::ScaleFree { n, .. } => Some(*n),
            TopologySpec::TwoLevel { domains, nodes_per_domain, .. } => {
                Some(domains * nodes_per_domain)
            }
            TopologySpec::Ocean { cluster_size, .. } => Some(2 * cluster_size),
            TopologySpec::File { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeSpec {
    Exact,
    Compact { landmarks: Option<usize>, strategy: LandmarkStrategy },
    Stacked { i: u32 },
    Hierarchical { k: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairSpec {
    /// Exhaustive up to the all-pairs cap, sampled beyond it.
    Auto,
    Exhaustive,
    Sampled { count: usize },
}

impl PairSpec {
    /// Concrete pair set for one replication.
    pub fn realize(&self, node_count: usize, seed: u64) -> PairSample {
        match self {
            PairSpec::Auto => {
                if node_count <= DEFAULT_ALL_PAIRS_CAP {
                    PairSample::exhaustive(node_count)
                } else {
                    PairSample::sampled(node_count, DEFAULT_SAMPLED_PAIRS, seed)
                }
            }
            PairSpec::Exhaustive => PairSample::exhaustive(node_count),
            PairSpec::Sampled { count } => PairSample::sampled(node_count, *count, seed),
        }
    }
}

/// A validated experiment: ready to run, all defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: TopologySpec,
    pub schemes: Vec<SchemeSpec>,
    pub metrics: Vec<Metric>,
    pub pairs: PairSpec,
    /// Metric the schemes are built under (tables and labels).
    pub build_metric: Metric,
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Fixed-order rendering of everything that affects results.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "config_version={CONFIG_VERSION}");
        let _ = writeln!(s, "topology={}", self.topology.name());
        for scheme in &self.schemes {
            match scheme {
                SchemeSpec::Exact => {
                    let _ = writeln!(s, "scheme=exact");
                }
                SchemeSpec::Compact { landmarks, strategy } => {
                    let l = landmarks.map_or("auto".to_string(), |l| l.to_string());
                    let _ = writeln!(s, "scheme=compact landmarks={l} strategy={}", strategy.name());
                }
                SchemeSpec::Stacked { i } => {
                    let _ = writeln!(s, "scheme=stacked i={i}");
                }
                SchemeSpec::Hierarchical { k } => {
                    let _ = writeln!(s, "scheme=hierarchical k={k}");
                }
            }
        }
        let metrics: Vec<&str> = self.metrics.iter().map(|m| m.name()).collect();
        let _ = writeln!(s, "metrics={}", metrics.join(","));
        match &self.pairs {
            PairSpec::Auto => {
                let _ = writeln!(s, "pairs=auto");
            }
            PairSpec::Exhaustive => {
                let _ = writeln!(s, "pairs=exhaustive");
            }
            PairSpec::Sampled { count } => {
                let _ = writeln!(s, "pairs=sampled count={count}");
            }
        }
        let _ = writeln!(s, "build_metric={}", self.build_metric.name());
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "seeds={}", seeds.join(","));
        s
    }

    /// Hex SHA-256 of [`Self::canonical_string`].
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_string().as_bytes());
        hasher.finalize().iter().fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    config_version: i64,
    topology: RawTopology,
    #[serde(default)]
    schemes: Vec<RawScheme>,
    metrics: Option<Vec<String>>,
    pairs: Option<RawPairs>,
    build_metric: Option<String>,
    seeds: Option<Vec<i64>>,
    out_dir: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    kind: String,
    n: Option<i64>,
    radius: Option<f64>,
    attach_m: Option<i64>,
    domains: Option<i64>,
    nodes_per_domain: Option<i64>,
    inter_edges: Option<i64>,
    cluster_size: Option<i64>,
    bridge_weight: Option<f64>,
    path: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    kind: String,
    landmarks: Option<i64>,
    strategy: Option<String>,
    i: Option<i64>,
    k: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPairs {
    mode: String,
    count: Option<i64>,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> HarnessError {
    HarnessError::ConfigInvalid { field: field.into(), reason: reason.into() }
}

/// A count that must be present and at least `min`.
fn required_count(field: &str, value: Option<i64>, min: i64) -> Result<usize, HarnessError> {
    let v = value.ok_or_else(|| invalid(field, "missing required parameter"))?;
    if v < min {
        return Err(invalid(field, format!("{v} is below the minimum {min}")));
    }
    Ok(v as usize)
}

fn optional_count(field: &str, value: Option<i64>, min: i64) -> Result<Option<usize>, HarnessError> {
    value.map(|v| required_count(field, Some(v), min)).transpose()
}

/// Rejects parameters that do not belong to the selected kind.
fn reject_foreign(
    prefix: &str,
    kind: &str,
    params: &[(&str, bool)],
    allowed: &[&str],
) -> Result<(), HarnessError> {
    for (name, is_set) in params {
        if *is_set && !allowed.contains(name) {
            return Err(invalid(
                format!("{prefix}.{name}"),
                format!("not a parameter of kind `{kind}`"),
            ));
        }
    }
    Ok(())
}

fn parse_metric(field: &str, name: &str) -> Result<Metric, HarnessError> {
    match name {
        "hop" => Ok(Metric::Hop),
        "rtt" => Ok(Metric::Rtt),
        other => Err(invalid(field, format!("unknown metric `{other}` (use hop or rtt)"))),
    }
}

fn validate_topology(raw: &RawTopology) -> Result<TopologySpec, HarnessError> {
    let params = [
        ("n", raw.n.is_some()),
        ("radius", raw.radius.is_some()),
        ("attach_m", raw.attach_m.is_some()),
        ("domains", raw.domains.is_some()),
        ("nodes_per_domain", raw.nodes_per_domain.is_some()),
        ("inter_edges", raw.inter_edges.is_some()),
        ("cluster_size", raw.cluster_size.is_some()),
        ("bridge_weight", raw.bridge_weight.is_some()),
        ("path", raw.path.is_some()),
    ];
    match raw.kind.as_str() {
        "geometric" => {
            reject_foreign("topology", "geometric", &params, &["n", "radius"])?;
            let n = required_count("topology.n", raw.n, 2)?;
            if let Some(r) = raw.radius {
                if !r.is_finite() || r <= 0.0 {
                    return Err(invalid("topology.radius", format!("{r} must be positive")));
                }
            }
            Ok(TopologySpec::Geometric { n, radius: raw.radius })
        }
        "scale_free" => {
            reject_foreign("topology", "scale_free", &params, &["n", "attach_m"])?;
            let n = required_count("topology.n", raw.n, 2)?;
            let attach_m = optional_count("topology.attach_m", raw.attach_m, 1)?.unwrap_or(2);
            if attach_m >= n {
                return Err(invalid(
                    "topology.attach_m",
                    format!("{attach_m} must be below the node count {n}"),
                ));
            }
            Ok(TopologySpec::ScaleFree { n, attach_m })
        }
        "two_level" => {
            reject_foreign(
                "topology",
                "two_level",
                &params,
                &["domains", "nodes_per_domain", "inter_edges"],
            )?;
            let domains = required_count("topology.domains", raw.domains, 1)?;
            let nodes_per_domain =
                required_count("topology.nodes_per_domain", raw.nodes_per_domain, 1)?;
            let inter_edges = required_count("topology.inter_edges", raw.inter_edges, 0)?;
            if inter_edges + 1 < domains {
                return Err(invalid(
                    "topology.inter_edges",
                    format!("{inter_edges} cannot connect {domains} domains (need at least domains - 1)"),
                ));
            }
            Ok(TopologySpec::TwoLevel { domains, nodes_per_domain, inter_edges })
        }
        "ocean" => {
            reject_foreign("topology", "ocean", &params, &["cluster_size", "bridge_weight"])?;
            let cluster_size = required_count("topology.cluster_size", raw.cluster_size, 3)?;
            let bridge_weight = raw
                .bridge_weight
                .ok_or_else(|| invalid("topology.bridge_weight", "missing required parameter"))?;
            if !bridge_weight.is_finite() || bridge_weight < 10.0 {
                return Err(invalid(
                    "topology.bridge_weight",
                    format!("{bridge_weight} must be at least 10 to dominate intra-cluster costs"),
                ));
            }
            Ok(TopologySpec::Ocean { cluster_size, bridge_weight })
        }
        "file" => {
            reject_foreign("topology", "file", &params, &["path"])?;
            let path = raw
                .path
                .as_ref()
                .ok_or_else(|| invalid("topology.path", "missing required parameter"))?;
            Ok(TopologySpec::File { path: PathBuf::from(path) })
        }
        other => Err(invalid("topology.kind", format!("unknown generator `{other}`"))),
    }
}

fn validate_scheme(
    index: usize,
    raw: &RawScheme,
    node_hint: Option<usize>,
) -> Result<SchemeSpec, HarnessError> {
    let prefix = format!("schemes[{index}]");
    let params = [
        ("landmarks", raw.landmarks.is_some()),
        ("strategy", raw.strategy.is_some()),
        ("i", raw.i.is_some()),
        ("k", raw.k.is_some()),
    ];
    match raw.kind.as_str() {
        "exact" => {
            reject_foreign(&prefix, "exact", &params, &[])?;
            Ok(SchemeSpec::Exact)
        }
        "compact" => {
            reject_foreign(&prefix, "compact", &params, &["landmarks", "strategy"])?;
            let landmarks = optional_count(&format!("{prefix}.landmarks"), raw.landmarks, 1)?;
            if let (Some(l), Some(n)) = (landmarks, node_hint) {
                if l > n {
                    return Err(invalid(
                        format!("{prefix}.landmarks"),
                        format!("{l} exceeds the node count {n}"),
                    ));
                }
            }
            let strategy = match raw.strategy.as_deref() {
                None | Some("uniform") => LandmarkStrategy::Uniform,
                Some("high_degree") => LandmarkStrategy::HighDegree,
                Some(other) => {
                    return Err(invalid(
                        format!("{prefix}.strategy"),
                        format!("unknown strategy `{other}` (use uniform or high_degree)"),
                    ))
                }
            };
            Ok(SchemeSpec::Compact { landmarks, strategy })
        }
        "stacked" => {
            reject_foreign(&prefix, "stacked", &params, &["i"])?;
            let field = format!("{prefix}.i");
            let i = required_count(&field, raw.i, 0)? as u32;
            if i > 5 {
                return Err(invalid(field, format!("stacking level {i} exceeds the supported 5")));
            }
            if let Some(n) = node_hint {
                let needed = 1u128 << (1u32 << i);
                if (n as u128) < needed {
                    return Err(invalid(
                        field,
                        format!(
                            "stacking level {i} requires N >= 2^(2^{i}) = {needed} nodes, topology yields {n}"
                        ),
                    ));
                }
            }
            Ok(SchemeSpec::Stacked { i })
        }
        "hierarchical" => {
            reject_foreign(&prefix, "hierarchical", &params, &["k"])?;
            let field = format!("{prefix}.k");
            let k = required_count(&field, raw.k, 2)? as u64;
            if k > u16::MAX as u64 {
                return Err(invalid(field, format!("branching {k} exceeds the supported 65535")));
            }
            Ok(SchemeSpec::Hierarchical { k })
        }
        other => Err(invalid(
            format!("{prefix}.kind"),
            format!("unknown scheme `{other}` (use exact, compact, stacked, or hierarchical)"),
        )),
    }
}

/// Parses and cross-checks a TOML experiment config, applying documented
/// defaults: metrics [hop], pairs auto, build_metric hop, seeds [0].
pub fn validate_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;

    if raw.config_version != CONFIG_VERSION {
        return Err(invalid(
            "config_version",
            format!("unsupported version {} (this build understands {CONFIG_VERSION})", raw.config_version),
        ));
    }

    let topology = validate_topology(&raw.topology)?;
    let node_hint = topology.node_count_hint();

    if raw.schemes.is_empty() {
        return Err(invalid("schemes", "at least one scheme is required"));
    }
    let schemes = raw
        .schemes
        .iter()
        .enumerate()
        .map(|(idx, s)| validate_scheme(idx, s, node_hint))
        .collect::<Result<Vec<SchemeSpec>, HarnessError>>()?;

    let metrics = match raw.metrics {
        None => vec![Metric::Hop],
        Some(names) => {
            if names.is_empty() {
                return Err(invalid("metrics", "at least one metric is required"));
            }
            let mut metrics = Vec::new();
            for (idx, name) in names.iter().enumerate() {
                let m = parse_metric(&format!("metrics[{idx}]"), name)?;
                if metrics.contains(&m) {
                    return Err(invalid(format!("metrics[{idx}]"), format!("duplicate metric `{name}`")));
                }
                metrics.push(m);
            }
            metrics
        }
    };

    let pairs = match &raw.pairs {
        None => PairSpec::Auto,
        Some(raw_pairs) => match raw_pairs.mode.as_str() {
            "auto" => {
                if raw_pairs.count.is_some() {
                    return Err(invalid("pairs.count", "not a parameter of mode `auto`"));
                }
                PairSpec::Auto
            }
            "exhaustive" => {
                if raw_pairs.count.is_some() {
                    return Err(invalid("pairs.count", "not a parameter of mode `exhaustive`"));
                }
                PairSpec::Exhaustive
            }
            "sampled" => PairSpec::Sampled {
                count: optional_count("pairs.count", raw_pairs.count, 1)?
                    .unwrap_or(DEFAULT_SAMPLED_PAIRS),
            },
            other => {
                return Err(invalid(
                    "pairs.mode",
                    format!("unknown mode `{other}` (use auto, exhaustive, or sampled)"),
                ))
            }
        },
    };

    let build_metric = match raw.build_metric.as_deref() {
        None => Metric::Hop,
        Some(name) => parse_metric("build_metric", name)?,
    };

    let seeds = match raw.seeds {
        None => vec![0],
        Some(values) => {
            if values.is_empty() {
                return Err(invalid("seeds", "at least one seed is required"));
            }
            let mut seeds = Vec::new();
            for v in values {
                if v < 0 {
                    return Err(invalid("seeds", format!("seed {v} must be non-negative")));
                }
                let s = v as u64;
                if seeds.contains(&s) {
                    return Err(invalid("seeds", format!("duplicate seed {s}")));
                }
                seeds.push(s);
            }
            seeds
        }
    };

    Ok(ExperimentConfig {
        topology,
        schemes,
        metrics,
        pairs,
        build_metric,
        seeds,
        out_dir: raw.out_dir.map(PathBuf::from),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
config_version = 1

[topology]
kind = "scale_free"
n = 64

[[schemes]]
kind = "exact"
"#;

    /// Adds top-level keys; they must precede the table sections.
    fn minimal_plus(top_level: &str) -> String {
        MINIMAL.replace("config_version = 1", &format!("config_version = 1\n{top_level}"))
    }

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let config = validate_config(MINIMAL).unwrap();
        assert_eq!(config.topology, TopologySpec::ScaleFree { n: 64, attach_m: 2 });
        assert_eq!(config.schemes, vec![SchemeSpec::Exact]);
        assert_eq!(config.metrics, vec![Metric::Hop]);
        assert_eq!(config.pairs, PairSpec::Auto);
        assert_eq!(config.build_metric, Metric::Hop);
        assert_eq!(config.seeds, vec![0]);
        assert_eq!(config.out_dir, None);
    }

    fn field_of(err: HarnessError) -> String {
        match err {
            HarnessError::ConfigInvalid { field, .. } => field,
            other => panic!("expected ConfigInvalid, got {other:?}"),
        }
    }

    #[test]
    fn negative_node_count_names_the_field() {
        let text = MINIMAL.replace("n = 64", "n = -3");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "topology.n");
    }

    #[test]
    fn stacked_depth_precondition_is_surfaced() {
        let text = format!(
            "{MINIMAL}\n[[schemes]]\nkind = \"stacked\"\ni = 3\n"
        );
        // 2^(2^3) = 256 > 64.
        let err = validate_config(&text).unwrap_err();
        match err {
            HarnessError::ConfigInvalid { field, reason } => {
                assert_eq!(field, "schemes[1].i");
                assert!(reason.contains("2^(2^3)"), "precondition named: {reason}");
            }
            other => panic!("expected ConfigInvalid, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_fail_to_parse() {
        let text = format!("{MINIMAL}\nturbo = true\n");
        assert!(matches!(validate_config(&text), Err(HarnessError::Parse(_))));
    }

    #[test]
    fn foreign_generator_parameter_rejected() {
        let text = MINIMAL.replace("n = 64", "n = 64\ncluster_size = 5");
        assert_eq!(
            field_of(validate_config(&text).unwrap_err()),
            "topology.cluster_size"
        );
    }

    #[test]
    fn bad_metric_and_duplicates_rejected() {
        let text = minimal_plus("metrics = [\"hop\", \"latency\"]");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "metrics[1]");
        let text = minimal_plus("metrics = [\"hop\", \"hop\"]");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "metrics[1]");
    }

    #[test]
    fn seed_validation() {
        let text = minimal_plus("seeds = []");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "seeds");
        let text = minimal_plus("seeds = [1, 1]");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "seeds");
        let text = minimal_plus("seeds = [-2]");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "seeds");
    }

    #[test]
    fn missing_schemes_rejected() {
        let text = "config_version = 1\n\n[topology]\nkind = \"scale_free\"\nn = 8\n";
        assert_eq!(field_of(validate_config(text).unwrap_err()), "schemes");
    }

    #[test]
    fn version_gate() {
        let text = MINIMAL.replace("config_version = 1", "config_version = 2");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "config_version");
    }

    #[test]
    fn digest_ignores_formatting_but_not_content() {
        let reordered = r#"
# a comment
config_version = 1

[topology]
n = 64
kind = "scale_free"

[[schemes]]
kind = "exact"
"#;
        let a = validate_config(MINIMAL).unwrap();
        let b = validate_config(reordered).unwrap();
        assert_eq!(a.digest(), b.digest());

        let c = validate_config(&MINIMAL.replace("n = 64", "n = 65")).unwrap();
        assert_ne!(a.digest(), c.digest());

        // The output directory does not affect results, so not the digest.
        let d = validate_config(&minimal_plus("out_dir = \"elsewhere\"")).unwrap();
        assert_eq!(a.digest(), d.digest());
    }

    #[test]
    fn pairs_modes() {
        let text = format!("{MINIMAL}\n[pairs]\nmode = \"sampled\"\n");
        let config = validate_config(&text).unwrap();
        assert_eq!(config.pairs, PairSpec::Sampled { count: DEFAULT_SAMPLED_PAIRS });
        let text = format!("{MINIMAL}\n[pairs]\nmode = \"exhaustive\"\ncount = 5\n");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "pairs.count");
        let text = format!("{MINIMAL}\n[pairs]\nmode = \"weird\"\n");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "pairs.mode");
    }

    #[test]
    fn hierarchical_branching_bounds() {
        let text = format!("{MINIMAL}\n[[schemes]]\nkind = \"hierarchical\"\nk = 1\n");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "schemes[1].k");
        let text = format!("{MINIMAL}\n[[schemes]]\nkind = \"hierarchical\"\nk = 70000\n");
        assert_eq!(field_of(validate_config(&text).unwrap_err()), "schemes[1].k");
    }
}

use clap::{Parser, Subcommand};
use routelab::harness::{
    formulas_report, realize_topology, run_experiment, validate_config, HarnessError, TopologySpec,
};
use routelab::topology::emit_edge_list;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "routelab",
    version,
    about = "Laboratory for compact, stacked, and hierarchical routing schemes on synthetic topologies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Replace the config's seed list (repeat for several seeds).
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        /// Directory for the CSV outputs (overrides the config's out_dir).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads for pair evaluation (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the stacked table-size law worked through for one (N, k).
    Formulas {
        /// Network size.
        #[arg(long)]
        n: u64,
        /// Per-level table-size threshold.
        #[arg(long)]
        k: u64,
    },
    /// Generate a topology and emit it in edge-list form.
    Gen {
        #[command(subcommand)]
        generator: GenCommand,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random geometric graph on the unit square (RTT = distance).
    Geometric {
        #[arg(long)]
        n: usize,
        /// Connection radius; defaults to a radius safely above the
        /// connectivity threshold.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preferential-attachment graph (unit weights).
    ScaleFree {
        #[arg(long)]
        n: usize,
        /// Edges added per new node.
        #[arg(long, default_value_t = 2)]
        attach_m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense domains joined by a sparse, expensive overlay.
    TwoLevel {
        #[arg(long)]
        domains: usize,
        #[arg(long)]
        nodes_per_domain: usize,
        /// Total inter-domain links (at least domains - 1).
        #[arg(long)]
        inter_edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two cliques joined by two wide bridges (hop-cheap, weight-expensive).
    Ocean {
        #[arg(long)]
        cluster_size: usize,
        #[arg(long, default_value_t = 50.0)]
        bridge_weight: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn invalid(field: &str, reason: String) -> HarnessError {
    HarnessError::ConfigInvalid { field: field.to_string(), reason }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, seeds, out_dir, threads } => {
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .map_err(|e| HarnessError::Run {
                        context: "configuring the thread pool".to_string(),
                        message: e.to_string(),
                    })?;
            }
            let text = fs::read_to_string(&config)
                .map_err(|e| HarnessError::Io { path: config.clone(), source: e })?;
            let mut experiment = validate_config(&text)?;
            if !seeds.is_empty() {
                for (idx, s) in seeds.iter().enumerate() {
                    if seeds[..idx].contains(s) {
                        return Err(invalid("--seed", format!("duplicate seed {s}")));
                    }
                }
                experiment.seeds = seeds;
            }
            let out = out_dir
                .or_else(|| experiment.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            let record = run_experiment(&experiment, &out)?;
            println!("config digest: {}", record.config_digest);
            let seed_list: Vec<String> = record.seeds.iter().map(u64::to_string).collect();
            println!("seeds: {}", seed_list.join(", "));
            println!("stretch rows: {} -> {}", record.stretch_rows, record.stretch_csv.display());
            println!("table rows: {} -> {}", record.table_rows, record.tables_csv.display());
            let phases: Vec<String> = record
                .phase_wall
                .iter()
                .map(|(name, wall)| format!("{name} {wall:.2?}"))
                .collect();
            println!("phase wall times: {}", phases.join(", "));
            Ok(())
        }
        Command::Formulas { n, k } => {
            print!("{}", formulas_report(n, k)?);
            Ok(())
        }
        Command::Gen { generator } => run_gen(generator),
    }
}

fn run_gen(generator: GenCommand) -> Result<(), HarnessError> {
    let (spec, seed, out) = match generator {
        GenCommand::Geometric { n, radius, seed, out } => {
            if n < 2 {
                return Err(invalid("--n", format!("{n} must be at least 2")));
            }
            if let Some(r) = radius {
                if !r.is_finite() || r <= 0.0 {
                    return Err(invalid("--radius", format!("{r} must be positive")));
                }
            }
            (TopologySpec::Geometric { n, radius }, seed, out)
        }
        GenCommand::ScaleFree { n, attach_m, seed, out } => {
            if n < 2 {
                return Err(invalid("--n", format!("{n} must be at least 2")));
            }
            if attach_m < 1 || attach_m >= n {
                return Err(invalid(
                    "--attach-m",
                    format!("{attach_m} must be between 1 and n - 1"),
                ));
            }
            (TopologySpec::ScaleFree { n, attach_m }, seed, out)
        }
        GenCommand::TwoLevel { domains, nodes_per_domain, inter_edges, seed, out } => {
            if domains < 1 || nodes_per_domain < 1 {
                return Err(invalid("--domains", "domain counts must be positive".to_string()));
            }
            if inter_edges + 1 < domains {
                return Err(invalid(
                    "--inter-edges",
                    format!("{inter_edges} cannot connect {domains} domains"),
                ));
            }
            (TopologySpec::TwoLevel { domains, nodes_per_domain, inter_edges }, seed, out)
        }
        GenCommand::Ocean { cluster_size, bridge_weight, seed, out } => {
            if cluster_size < 3 {
                return Err(invalid("--cluster-size", format!("{cluster_size} must be at least 3")));
            }
            if !bridge_weight.is_finite() || bridge_weight < 10.0 {
                return Err(invalid("--bridge-weight", format!("{bridge_weight} must be at least 10")));
            }
            (TopologySpec::Ocean { cluster_size, bridge_weight }, seed, out)
        }
    };
    let graph = realize_topology(&spec, seed)?;
    let text = emit_edge_list(&graph);
    match out {
        Some(path) => {
            fs::write(&path, text).map_err(|e| HarnessError::Io { path: path.clone(), source: e })?;
            eprintln!(
                "wrote {} ({} nodes, {} edges)",
                path.display(),
                graph.node_count(),
                graph.edge_count()
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

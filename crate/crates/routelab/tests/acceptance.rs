//! Acceptance gate: the ten headline guarantees of the lab, one test and one
//! printed verdict line each. Budgets and thresholds follow the project
//! contract; run with --nocapture to see the verdict lines on success.

use routelab::compact::{build_compact, select_landmarks, LandmarkSet, LandmarkStrategy};
use routelab::metrics::{
    dual_stretch, remoteness_profile, stretch_distribution, write_stretch_csv, PairSample,
    StretchRow, TableSizeSummary,
};
use routelab::route::RoutingScheme;
use routelab::shortest_path::{all_pairs, DistanceOracle};
use routelab::stacked::{build_hierarchical, build_stacked};
use routelab::topology::{
    generate_geometric, generate_ocean, generate_scale_free, geometric_radius, Graph, Metric,
};

use std::fs;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

fn verdict(number: u32, name: &str, ok: bool, detail: &str) {
    let word = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number:02} {name}: {word} ({detail})");
    assert!(ok, "criterion {number:02} {name}: FAIL ({detail})");
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

#[test]
fn criterion_01_formula_reproduction() {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_routelab"))
        .args(["formulas", "--n", "4294967296", "--k", "256"])
        .output()
        .expect("failed to spawn routelab");
    let elapsed = started.elapsed();
    let text = String::from_utf8(out.stdout).unwrap();
    let ok = out.status.success()
        && text.contains("i = 2")
        && text.contains("per_level = 256")
        && text.contains("table_total = 1024")
        && text.contains("stretch_bound = 9")
        && within(elapsed, Duration::from_secs(1));
    verdict(1, "formula reproduction", ok, &format!("N=2^32 k=2^8 in {elapsed:.2?}"));
}

/// The twenty compact schemes shared by criteria 2 and 3: ten geometric
/// graphs built and measured under RTT, ten scale-free under HOP, sqrt(256)
/// = 16 uniform landmarks each.
fn compact_fleet() -> Vec<(Arc<Graph>, routelab::compact::CompactScheme, Metric, String)> {
    let mut fleet = Vec::new();
    for seed in 0..10u64 {
        let g = Arc::new(generate_geometric(256, geometric_radius(256), seed).unwrap());
        let set = select_landmarks(&g, 16, LandmarkStrategy::Uniform, seed, Metric::Rtt).unwrap();
        let scheme = build_compact(Arc::clone(&g), set, Metric::Rtt);
        fleet.push((g, scheme, Metric::Rtt, format!("geometric seed {seed}")));
    }
    for seed in 0..10u64 {
        let g = Arc::new(generate_scale_free(256, 2, seed).unwrap());
        let set = select_landmarks(&g, 16, LandmarkStrategy::Uniform, seed, Metric::Hop).unwrap();
        let scheme = build_compact(Arc::clone(&g), set, Metric::Hop);
        fleet.push((g, scheme, Metric::Hop, format!("scale-free seed {seed}")));
    }
    fleet
}

#[test]
fn criterion_02_hard_stretch_three() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut culprit = String::new();
    for (g, scheme, metric, tag) in compact_fleet() {
        let oracle = all_pairs(&g, metric).unwrap();
        match stretch_distribution(&scheme, &oracle, &PairSample::exhaustive(256)) {
            Ok(stats) => {
                if stats.max() > worst {
                    worst = stats.max();
                }
                if stats.max() > 3.0 + 1e-9 {
                    ok = false;
                    culprit = tag;
                }
            }
            Err(e) => {
                // Any routing failure counts as a ForwardingStuck event.
                ok = false;
                culprit = format!("{tag}: {e}");
            }
        }
        if !ok {
            break;
        }
    }
    let elapsed = started.elapsed();
    ok = ok && within(elapsed, Duration::from_secs(60));
    verdict(
        2,
        "hard stretch-3 bound",
        ok,
        &format!("20 graphs exhaustive, max stretch {worst:.6}, {elapsed:.2?} {culprit}"),
    );
}

#[test]
fn criterion_03_sublinear_tables() {
    let mut ok = true;
    let mut worst_mean = 0.0f64;
    let mut culprit = String::new();
    for (_, scheme, _, tag) in compact_fleet() {
        for table in scheme.tables() {
            if table.landmark_entries.len() != 16 {
                ok = false;
                culprit = format!("{tag}: node {} has {} landmark rows", table.owner, table.landmark_entries.len());
            }
        }
        let summary = TableSizeSummary::from_sizes(scheme.table_sizes());
        if summary.mean > worst_mean {
            worst_mean = summary.mean;
        }
        if summary.mean > 48.0 {
            ok = false;
            culprit = format!("{tag}: mean {:.2}", summary.mean);
        }
    }
    verdict(
        3,
        "sublinear tables",
        ok,
        &format!("worst mean {worst_mean:.2} vs 3*sqrt(N) = 48, landmark rows 16 {culprit}"),
    );
}

#[test]
fn criterion_04_logarithmic_hierarchy_scaling() {
    let started = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    let mut size_means = Vec::new();
    for n in [256usize, 1024, 4096, 16384] {
        let bound = 3.0 * 8.0 * ((n as f64).log2() / 3.0);
        let mut means = Vec::new();
        for seed in 0..3u64 {
            let g = Arc::new(generate_geometric(n, geometric_radius(n), seed).unwrap());
            let scheme = build_hierarchical(Arc::clone(&g), 8, Metric::Hop, seed).unwrap();
            let mean = TableSizeSummary::from_sizes(scheme.table_sizes()).mean;
            if mean > bound {
                ok = false;
                detail = format!("n {n} seed {seed}: mean {mean:.2} above {bound:.1}");
            }
            means.push(mean);
        }
        size_means.push(means.iter().sum::<f64>() / means.len() as f64);
    }
    let growth = size_means[3] / size_means[0];
    if growth > 2.5 {
        ok = false;
        detail = format!("growth ratio {growth:.3} above 2.5");
    }
    let elapsed = started.elapsed();
    ok = ok && within(elapsed, Duration::from_secs(300));
    verdict(
        4,
        "logarithmic hierarchy scaling",
        ok,
        &format!(
            "k=8 means {:.1}/{:.1}/{:.1}/{:.1}, growth ratio {growth:.3}, {elapsed:.2?} {detail}",
            size_means[0], size_means[1], size_means[2], size_means[3]
        ),
    );
}

#[test]
fn criterion_05_stacked_equals_hierarchical() {
    let g = Arc::new(generate_scale_free(4096, 2, 0).unwrap());
    let stacked = build_stacked(Arc::clone(&g), 2, Metric::Hop, 42).unwrap();
    let hierarchical = build_hierarchical(Arc::clone(&g), 8, Metric::Hop, 42).unwrap();
    let trees_equal = stacked.tree() == hierarchical.tree();
    let tables_equal = stacked.table_sizes() == hierarchical.table_sizes();
    verdict(
        5,
        "stacked equals hierarchical",
        trees_equal && tables_equal,
        &format!("N=4096 i=2 vs k=8: trees equal {trees_equal}, table vectors equal {tables_equal}"),
    );
}

#[test]
fn criterion_06_depth_zero_oracle_equivalence() {
    let g = Arc::new(generate_geometric(256, geometric_radius(256), 0).unwrap());
    let mut ok = true;
    let mut detail = String::new();
    for metric in [Metric::Hop, Metric::Rtt] {
        let scheme = build_stacked(Arc::clone(&g), 0, metric, 0).unwrap();
        let oracle = all_pairs(&g, metric).unwrap();
        'pairs: for s in 0..256 {
            for t in 0..256 {
                if s == t {
                    continue;
                }
                let cost = scheme.route(s, t).unwrap().cost(metric);
                let d = oracle.distance(s, t).unwrap();
                if (cost - d).abs() > 1e-9 * d.max(1.0) {
                    ok = false;
                    detail = format!("{metric:?} {s} -> {t}: {cost} vs {d}");
                    break 'pairs;
                }
            }
        }
    }
    verdict(
        6,
        "depth-0 oracle equivalence",
        ok,
        &format!("n=256 all pairs, both metrics, relative 1e-9 {detail}"),
    );
}

fn stretch_nine_report() -> (Vec<u8>, Vec<f64>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut means = Vec::new();
    let mut violations = Vec::new();
    for seed in 0..5u64 {
        let g = Arc::new(generate_geometric(4096, geometric_radius(4096), seed).unwrap());
        let scheme = build_stacked(Arc::clone(&g), 2, Metric::Hop, seed).unwrap();
        let sample = PairSample::sampled(4096, 10_000, seed);
        let oracle = DistanceOracle::for_sources(&g, sample.sources(), Metric::Hop).unwrap();
        let stats = stretch_distribution(&scheme, &oracle, &sample).unwrap();
        means.push(stats.mean());
        violations.push(stats.violation_fraction(9.0));
        rows.push(StretchRow {
            scheme: scheme.scheme_name(),
            graph: format!("geometric(n=4096,r=auto) seed {seed}"),
            seed,
            stats,
            bound: 9.0,
        });
    }
    let mut csv = Vec::new();
    write_stretch_csv(&mut csv, &rows).unwrap();
    (csv, means, violations)
}

#[test]
fn criterion_07_stretch_nine_audit() {
    let started = Instant::now();
    let (csv_a, means, violations) = stretch_nine_report();
    let (csv_b, _, _) = stretch_nine_report();
    let deterministic = csv_a == csv_b;
    let means_sane = means.iter().all(|&m| m >= 1.0 - 1e-9);
    let elapsed = started.elapsed();
    let ok = deterministic && means_sane && within(elapsed, Duration::from_secs(600));
    let violation_list: Vec<String> =
        violations.iter().map(|v| format!("{v:.5}")).collect();
    verdict(
        7,
        "stretch-9 audit",
        ok,
        &format!(
            "5 seeds, 10k pairs each: violation fractions [{}], deterministic {deterministic}, {elapsed:.2?}",
            violation_list.join(", ")
        ),
    );
}

#[test]
fn criterion_08_hop_rtt_divergence() {
    let started = Instant::now();

    // Two 8-cliques joined by wide bridges; the landmark sits across the
    // bridge so near-side pairs detour over it.
    let ocean = Arc::new(generate_ocean(8, 50.0, 0).unwrap());
    let landmarks = LandmarkSet::from_members(&ocean, [9], Metric::Hop).unwrap();
    let scheme = build_compact(Arc::clone(&ocean), landmarks, Metric::Hop);
    let hop = all_pairs(&ocean, Metric::Hop).unwrap();
    let rtt = all_pairs(&ocean, Metric::Rtt).unwrap();
    let dual = dual_stretch(&scheme, &hop, &rtt, &PairSample::exhaustive(16)).unwrap();
    let divergent = dual.joint.iter().any(|p| p.hop_stretch <= 1.5 && p.rtt_stretch >= 1.8);

    // On unit weights the two scores coincide pair by pair.
    let flat = Arc::new(generate_scale_free(64, 2, 1).unwrap());
    let set = select_landmarks(&flat, 8, LandmarkStrategy::Uniform, 1, Metric::Hop).unwrap();
    let flat_scheme = build_compact(Arc::clone(&flat), set, Metric::Hop);
    let fh = all_pairs(&flat, Metric::Hop).unwrap();
    let fr = all_pairs(&flat, Metric::Rtt).unwrap();
    let flat_dual = dual_stretch(&flat_scheme, &fh, &fr, &PairSample::exhaustive(64)).unwrap();
    let identical = flat_dual
        .joint
        .iter()
        .all(|p| (p.hop_stretch - p.rtt_stretch).abs() <= 1e-9)
        && (flat_dual.hop.mean() - flat_dual.rtt.mean()).abs() <= 1e-9
        && (flat_dual.hop.max() - flat_dual.rtt.max()).abs() <= 1e-9;

    let elapsed = started.elapsed();
    let ok = divergent && identical && within(elapsed, Duration::from_secs(5));
    verdict(
        8,
        "hop/rtt divergence",
        ok,
        &format!("bridge pair found {divergent}, unit-weight identity {identical}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_09_remoteness_ordering() {
    let started = Instant::now();
    let mut sf_diameters = Vec::new();
    let mut geo_diameters = Vec::new();
    for seed in 0..5u64 {
        let sf = generate_scale_free(4096, 2, seed).unwrap();
        let geo = generate_geometric(4096, geometric_radius(4096), seed).unwrap();
        let sample = PairSample::exhaustive(4096);
        sf_diameters.push(remoteness_profile(&sf, Metric::Hop, &sample).diameter);
        geo_diameters.push(remoteness_profile(&geo, Metric::Hop, &sample).diameter);
    }
    let max_sf = sf_diameters.iter().fold(0.0f64, |a, &b| a.max(b));
    let min_geo = geo_diameters.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let elapsed = started.elapsed();
    let ok = max_sf < min_geo && within(elapsed, Duration::from_secs(120));
    verdict(
        9,
        "small-world vs geometric remoteness",
        ok,
        &format!(
            "scale-free diameters {sf_diameters:?} all below geometric {geo_diameters:?}, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let config = "\
config_version = 1
metrics = [\"hop\", \"rtt\"]
seeds = [3, 11]

[topology]
kind = \"geometric\"
n = 128

[[schemes]]
kind = \"exact\"

[[schemes]]
kind = \"compact\"

[[schemes]]
kind = \"stacked\"
i = 1

[pairs]
mode = \"sampled\"
count = 1500
";
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), config).unwrap();
    let mut outputs = Vec::new();
    for (sub, threads) in [("a", "2"), ("b", "2"), ("c", "7")] {
        let out = Command::new(env!("CARGO_BIN_EXE_routelab"))
            .args(["run", "exp.toml", "--out-dir", sub, "--threads", threads])
            .current_dir(dir.path())
            .output()
            .expect("failed to spawn routelab");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((
            fs::read(dir.path().join(sub).join("stretch.csv")).unwrap(),
            fs::read(dir.path().join(sub).join("tables.csv")).unwrap(),
        ));
    }
    let rerun_equal = outputs[0] == outputs[1];
    let threads_equal = outputs[0] == outputs[2];
    verdict(
        10,
        "byte-identical determinism",
        rerun_equal && threads_equal,
        &format!("rerun equal {rerun_equal}, thread-count invariant {threads_equal}"),
    );
}

//! routelab is a laboratory for routing schemes with sublinear state: exact
//! shortest-path routing, one-level landmark/vicinity compact routing with
//! worst-case stretch 3, recursively stacked compactization (2^i tables of
//! size about N^(1/2^i) at stretch about 3^i), and hierarchical
//! partition-tree routing with logarithmic tables.
//!
//! The crate builds schemes on synthetic or ingested topologies, simulates
//! hop-by-hop forwarding, and measures what the formulas promise: table
//! sizes, hop stretch, and RTT stretch. Everything is deterministic for a
//! fixed seed.

pub mod compact;
pub mod harness;
pub mod metrics;
pub mod route;
pub mod shortest_path;
pub mod stacked;
pub mod topology;

//! Topology-aware vaccination planning on contact networks.
//!
//! The crate builds contact graphs (synthetic or from proximity-sensor
//! logs), ranks people by centrality, measures how removing them lowers
//! the adjacency spectral radius `λ_max`, and simulates SIR outbreaks with
//! vaccination campaigns applied mid-epidemic.
//!
//! * [`graph`]: immutable undirected graphs, node deletion, edge-list IO
//! * [`generators`]: seeded random graph families and edge shuffling
//! * [`centrality`]: degree, closeness, betweenness, eigenvector
//! * [`spectral`]: `λ_max` and the `β/δ ≤ 1/λ_max` threshold
//! * [`vaccination`]: removal plans, eigenvalue drops, herd equivalence
//! * [`sir`]: event-driven SIR with interventions
//! * [`stats`]: summary statistics and the paired t-test
//! * [`ingest`]: tab-separated contact logs to daily graphs
//! * [`experiment`]: the table and simulation pipelines behind the CLI

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod centrality;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod ingest;
pub mod seed;
pub mod sir;
pub mod spectral;
pub mod stats;
pub mod vaccination;

pub use centrality::{CentralityScores, Metric};
pub use error::{Error, Result};
pub use generators::{Family, GenSpec};
pub use graph::{DegreeStats, Graph, NodeId};
pub use spectral::{PowerOptions, SpectralResult};

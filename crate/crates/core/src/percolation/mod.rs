//! Bernoulli bond percolation on the dual lattice Γ.

pub mod circuit;
pub mod cluster;
pub mod crossing;
pub mod estimate;
pub mod lattice;

pub use circuit::{find_closed_circuit, Circuit};
pub use cluster::ClusterIndex;
pub use crossing::{crossing_exists, crossing_exists_rect, Rect};
pub use estimate::{
    estimate_circuit_prob, estimate_crossing_prob, estimate_crossing_rect, fit_connectivity_decay,
    ConnectivityDecay, ProbabilityEstimate,
};
pub use lattice::{sample_bonds, Bond, BondConfig, DualLattice};

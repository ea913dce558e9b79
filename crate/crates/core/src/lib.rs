//! Numerical laboratory for localization in two-dimensional Landau
//! Hamiltonians with Anderson-type random potentials.

pub mod cutoff;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod linalg;
pub mod percolation;
pub mod potential;
pub mod projector;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

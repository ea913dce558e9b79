//! Finite-volume magnetic Schrödinger operators on Dirichlet grids.

pub mod grid;
pub mod matrix;

pub use grid::{wedge, Grid};
pub use matrix::{link_phase, HamiltonianMatrix, SpectralData, MAX_FLUX};
pub mod resolvent;

pub use resolvent::{
    cutoff_gradient_check, geometric_resolvent_check, gradient_bound_check, gre_composite_check, green_norm,
    CompositeCheck, CutoffGradientReport, GradientReport, GreCheck, Resolvent,
};

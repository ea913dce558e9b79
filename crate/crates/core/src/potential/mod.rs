//! Anderson-type random potentials V(x) = Σ λ_j u(x - j) and ribbons.

pub mod bump;
pub mod coupling;
pub mod ribbon;
pub mod sample;

pub use bump::SingleSiteBump;
pub use coupling::{is_occupied, occupation_probability, CouplingFamily, CouplingSpec};
pub use ribbon::{
    bonds_from_potential, build_ribbon, sites_for_extent, verify_ribbon_condition, verify_ribbon_condition_with,
    Ribbon, RibbonCheck, RibbonGeometry,
};
pub use sample::{sample_couplings, Mollifier, PotentialSample, SiteRegion};

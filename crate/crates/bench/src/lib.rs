//! Fixtures shared by the benchmarks.

use landau_core::experiments::common::landau_box;
use landau_core::hamiltonian::HamiltonianMatrix;
use landau_core::potential::{sample_couplings, CouplingSpec, SingleSiteBump, SiteRegion};

/// Disordered B = 20 Hamiltonian on a box of side `side` with B h² = 0.2.
pub fn disordered(side: u32, seed: u64) -> HamiltonianMatrix {
    let b = 20.0;
    let grid = landau_box(b, side, 0.0, 0.2).expect("valid box");
    let r = grid.rect();
    let bump = SingleSiteBump::covering(1.0).expect("valid bump");
    let spec = CouplingSpec::uniform(4.0).expect("valid spec");
    let v = sample_couplings(&spec, bump, SiteRegion::covering_box(r.lo, r.hi, bump.r_u), seed);
    HamiltonianMatrix::assemble(b, &v, grid).expect("assembles")
}
